#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bagged_eb/errors.hpp"
#include "bagged_eb/models.hpp"
#include "bagged_eb/parallel.hpp"
#include "bagged_eb/random.hpp"

namespace beb {

enum class Scheme {
  Nonparametric,  // whole area tuples drawn with replacement
  Parametric,     // responses redrawn from the model fitted to the original data
  Identity,       // every replicate is the original data (diagnostic)
};

std::string_view to_string(Scheme s);
Scheme parse_scheme(std::string_view s);

struct BootstrapSpec {
  std::size_t B = 100;
  Scheme scheme = Scheme::Nonparametric;
  std::uint64_t seed = 0;
  std::size_t max_retries = 10;
};

struct AreaEstimate {
  std::string id;
  double direct = 0.0;
  double eb = 0.0;
  double beb = 0.0;
  double bootstrap_sd = 0.0;  // sqrt(jensen_gap)
  double jensen_gap = 0.0;
  std::optional<double> pct_rel_diff;  // 100 (beb - eb) / eb; empty when eb == 0
};

template <class Model>
struct BebResult {
  std::vector<AreaEstimate> areas;
  typename Model::Fit fit;  // original-data fit behind the EB column
  // Successful replicates in replicate order. replicate_bayes[k][i] is the
  // Bayes rule for area i evaluated at the ORIGINAL observation with
  // bootstrap_params[k]; replicate_index[k] is its replicate number b.
  std::vector<typename Model::Params> bootstrap_params;
  std::vector<std::size_t> replicate_index;
  std::vector<std::vector<double>> replicate_bayes;
  std::size_t n_retries = 0;
  std::size_t n_failed = 0;
};

/// Bootstrap variance (divisor B) of one area's per-replicate Bayes values:
/// mean(v^2) - mean(v)^2, computed as the mean squared deviation.
double jensen_gap(std::span<const double> values);

/// Order-statistic quantile with linear interpolation between closest ranks.
double quantile(std::vector<double> values, double prob);

inline constexpr double kDiagnosticProbs[] = {0.01, 0.25, 0.50, 0.75, 0.99};

struct ParamTable {
  std::vector<std::string> names;
  std::vector<std::size_t> replicate;      // row labels
  std::vector<std::vector<double>> rows;   // one per successful replicate
  std::vector<double> ml;                  // original-data estimate
  std::vector<std::vector<double>> quantiles;  // [coordinate][kDiagnosticProbs]
  std::vector<double> mean;                // per coordinate
};

namespace detail {

template <class Model>
typename Model::Params fit_params(const Dataset<typename Model::Area>& d,
                                  const typename Model::Options& opts) {
  return Model::fit(d, opts).params;
}

template <class Model>
Dataset<typename Model::Area> draw_replicate(const Dataset<typename Model::Area>& data,
                                             const typename Model::Params& fitted, Scheme scheme,
                                             Stream& rng) {
  switch (scheme) {
    case Scheme::Nonparametric:
      return resample_nonparametric(data, rng);
    case Scheme::Parametric:
      return Model::parametric(data, fitted, rng);
    case Scheme::Identity:
      break;
  }
  return data;
}

ParamTable make_param_table(std::vector<std::string> names, std::vector<std::size_t> replicate,
                            std::vector<std::vector<double>> rows, std::vector<double> ml);

}  // namespace detail

/// Bagged empirical Bayes. Replicate b draws Y_(b) from the child stream
/// (seed, b, attempt), refits the hyperparameters, and evaluates the Bayes
/// rule at the original observations. A replicate whose fit throws FitError
/// is redrawn up to max_retries times and then excluded. Output does not
/// depend on `threads`.
template <class Model>
BebResult<Model> beb_estimate(const Dataset<typename Model::Area>& data, const BootstrapSpec& spec,
                              const typename Model::Options& opts = {}, unsigned threads = 1) {
  if (spec.B < 1) throw InputError("bootstrap replicate count B must be >= 1");
  BebResult<Model> res;
  try {
    res.fit = Model::fit(data, opts);
  } catch (const FitError& e) {
    throw NumericalError(std::string("fit on the original data failed: ") + e.what());
  }
  const auto m = data.size();

  struct Slot {
    std::optional<typename Model::Params> params;
    std::size_t retries = 0;
  };
  std::vector<Slot> slots(spec.B);
  parallel_for(spec.B, threads, [&](std::size_t b) {
    for (std::size_t attempt = 0; attempt <= spec.max_retries; ++attempt) {
      Stream rng = make_stream(spec.seed, {b, attempt});
      try {
        const auto replicate = detail::draw_replicate<Model>(data, res.fit.params, spec.scheme, rng);
        slots[b].params = Model::fit(replicate, opts).params;
        return;
      } catch (const FitError&) {
        ++slots[b].retries;
      }
    }
    slots[b].retries = spec.max_retries;  // the final attempt is a failure, not a retry
  });

  for (std::size_t b = 0; b < spec.B; ++b) {
    res.n_retries += slots[b].retries;
    if (!slots[b].params) {
      ++res.n_failed;
      continue;
    }
    std::vector<double> values(m);
    for (std::size_t i = 0; i < m; ++i) values[i] = Model::bayes(data[i], *slots[b].params);
    res.replicate_bayes.push_back(std::move(values));
    res.bootstrap_params.push_back(std::move(*slots[b].params));
    res.replicate_index.push_back(b);
  }
  if (res.replicate_bayes.empty())
    throw NumericalError("all " + std::to_string(spec.B) +
                         " bootstrap replicates failed to fit; no BEB estimate");

  const double n_ok = static_cast<double>(res.replicate_bayes.size());
  std::vector<double> column(res.replicate_bayes.size());
  for (std::size_t i = 0; i < m; ++i) {
    AreaEstimate est;
    est.id = data[i].id;
    est.direct = Model::direct(data[i]);
    est.eb = Model::bayes(data[i], res.fit.params);
    double sum = 0.0;
    for (std::size_t k = 0; k < column.size(); ++k) {
      column[k] = res.replicate_bayes[k][i];
      sum += column[k];
    }
    est.beb = sum / n_ok;
    est.jensen_gap = jensen_gap(column);
    est.bootstrap_sd = std::sqrt(est.jensen_gap);
    if (est.eb != 0.0) est.pct_rel_diff = 100.0 * (est.beb - est.eb) / est.eb;
    res.areas.push_back(std::move(est));
  }
  return res;
}

/// BEB values using only replicates numbered below `B`; these are nested
/// prefixes of one larger bootstrap run.
template <class Model>
std::vector<double> beb_prefix(const BebResult<Model>& res, std::size_t B) {
  const std::size_t m = res.areas.size();
  std::vector<double> sum(m, 0.0);
  std::size_t used = 0;
  for (std::size_t k = 0; k < res.replicate_bayes.size() && res.replicate_index[k] < B; ++k) {
    for (std::size_t i = 0; i < m; ++i) sum[i] += res.replicate_bayes[k][i];
    ++used;
  }
  if (used == 0) throw NumericalError("no successful replicate among the first " + std::to_string(B));
  for (auto& s : sum) s /= static_cast<double>(used);
  return sum;
}

/// Per-replicate hyperparameter table with the original-data ML estimate and
/// per-coordinate quantiles, for histogram diagnostics.
template <class Model>
ParamTable bootstrap_param_draws(const BebResult<Model>& res) {
  std::vector<std::vector<double>> rows;
  for (const auto& p : res.bootstrap_params) rows.push_back(Model::flatten(p));
  return detail::make_param_table(Model::param_names(res.fit.params.beta.size()),
                                  res.replicate_index, std::move(rows),
                                  Model::flatten(res.fit.params));
}

}  // namespace beb
