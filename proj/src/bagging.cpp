#include "bagged_eb/bagging.hpp"

#include <algorithm>

namespace beb {

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::Nonparametric:
      return "nonparametric";
    case Scheme::Parametric:
      return "parametric";
    case Scheme::Identity:
      return "identity";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view s) {
  if (s == "nonparametric" || s == "nonparametric-area") return Scheme::Nonparametric;
  if (s == "parametric") return Scheme::Parametric;
  if (s == "identity") return Scheme::Identity;
  throw InputError("unknown bootstrap scheme '" + std::string(s) +
                   "' (expected nonparametric, parametric or identity)");
}

double jensen_gap(std::span<const double> values) {
  if (values.empty()) throw InputError("jensen_gap: empty list");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(values.size());
}

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw InputError("quantile: empty list");
  std::sort(values.begin(), values.end());
  const double h = prob * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace detail {

ParamTable make_param_table(std::vector<std::string> names, std::vector<std::size_t> replicate,
                            std::vector<std::vector<double>> rows, std::vector<double> ml) {
  ParamTable t;
  t.names = std::move(names);
  t.replicate = std::move(replicate);
  t.rows = std::move(rows);
  t.ml = std::move(ml);
  const std::size_t k = t.names.size();
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> col;
    double sum = 0.0;
    for (const auto& r : t.rows) {
      col.push_back(r[j]);
      sum += r[j];
    }
    std::vector<double> q;
    for (double p : kDiagnosticProbs) q.push_back(col.empty() ? t.ml[j] : quantile(col, p));
    t.quantiles.push_back(std::move(q));
    t.mean.push_back(col.empty() ? t.ml[j] : sum / static_cast<double>(col.size()));
  }
  return t;
}

}  // namespace detail

}  // namespace beb
