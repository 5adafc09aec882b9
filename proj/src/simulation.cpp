#include "bagged_eb/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace beb {

std::string_view to_string(ModelKind k) { return k == ModelKind::FH ? "fh" : "pg"; }

ModelKind parse_model(std::string_view s) {
  if (s == "fh") return ModelKind::FH;
  if (s == "pg") return ModelKind::PG;
  throw InputError("unknown model '" + std::string(s) + "' (expected fh or pg)");
}

SimConfig default_config(ModelKind model, bool full_scale) {
  SimConfig c;
  c.model = model;
  if (model == ModelKind::FH) {
    c.hyper_grid = {0.1, 0.3, 0.5, 0.7};
    c.mu = 0.0;
  } else {
    c.hyper_grid = {40.0, 60.0, 80.0, 100.0};
    c.mu = 1.0;
  }
  if (full_scale) {
    c.m_grid = {10, 15, 20, 25, 30, 35, 40};
    c.R = 5000;
    c.B_grid = {25, 50, 100};
  } else {
    c.m_grid = {10, 20, 30};
    c.R = 500;
    c.B_grid = {25};
  }
  return c;
}

void validate(const SimConfig& cfg) {
  if (cfg.m_grid.empty() || cfg.hyper_grid.empty() || cfg.B_grid.empty())
    throw InputError("simulation grids m_grid, hyper_grid and B_grid must be nonempty");
  if (cfg.R < 1) throw InputError("simulation needs R >= 1");
  for (auto m : cfg.m_grid)
    if (m < 2) throw InputError("every m in m_grid must be >= 2");
  for (auto b : cfg.B_grid)
    if (b < 1) throw InputError("every B in B_grid must be >= 1");
  for (double h : cfg.hyper_grid) {
    if (!std::isfinite(h)) throw InputError("hyper_grid values must be finite");
    if (cfg.model == ModelKind::FH && h < 0.0) throw InputError("A values must be >= 0");
    if (cfg.model == ModelKind::PG && h <= 0.0) throw InputError("nu values must be > 0");
  }
  if (cfg.model == ModelKind::PG && !(cfg.mu > 0.0))
    throw InputError("Poisson-gamma prior mean mu must be > 0");
}

std::vector<double> design_D(std::size_t m) {
  if (m < 2) throw InputError("design_D needs m >= 2");
  std::vector<double> d(m);
  for (std::size_t i = 0; i < m; ++i)
    d[i] = 0.5 + static_cast<double>(i) / static_cast<double>(m - 1);
  return d;
}

std::vector<std::int64_t> design_n(std::size_t m) {
  if (m < 2) throw InputError("design_n needs m >= 2");
  std::vector<std::int64_t> n(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double v = 10.0 + 40.0 * static_cast<double>(i) / static_cast<double>(m - 1);
    n[i] = static_cast<std::int64_t>(std::round(v));  // half away from zero
  }
  return n;
}

double simulated_mse(const std::vector<std::vector<double>>& estimates,
                     const std::vector<std::vector<double>>& truths) {
  if (estimates.size() != truths.size() || estimates.empty())
    throw InputError("simulated_mse: replicate counts differ or are zero");
  double ss = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < estimates.size(); ++r) {
    if (estimates[r].size() != truths[r].size() || estimates[r].empty())
      throw InputError("simulated_mse: shape mismatch in replicate " + std::to_string(r));
    for (std::size_t i = 0; i < estimates[r].size(); ++i) {
      const double e = estimates[r][i] - truths[r][i];
      ss += e * e;
    }
    count += estimates[r].size();
  }
  return ss / static_cast<double>(count);
}

Generated<GaussianArea> generate_fh(std::span<const double> D, double A, double mu, Stream& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<GaussianArea> areas;
  std::vector<double> theta;
  const double sd = std::sqrt(A);
  for (std::size_t i = 0; i < D.size(); ++i) {
    const double t = mu + sd * z(rng);
    const double y = t + std::sqrt(D[i]) * z(rng);
    theta.push_back(t);
    areas.push_back({std::to_string(i + 1), y, D[i], {1.0}});
  }
  return {GaussianDataset(std::move(areas)), std::move(theta)};
}

Generated<CountArea> generate_pg(std::span<const std::int64_t> n, double nu, double mu,
                                 Stream& rng) {
  std::gamma_distribution<double> prior(nu * mu, 1.0 / nu);
  std::vector<CountArea> areas;
  std::vector<double> theta;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double t = prior(rng);
    const double rate = static_cast<double>(n[i]) * t;
    const std::int64_t z = rate > 0.0 ? std::poisson_distribution<std::int64_t>(rate)(rng) : 0;
    theta.push_back(t);
    areas.push_back({std::to_string(i + 1), z, static_cast<double>(n[i]), {1.0}});
  }
  return {CountDataset(std::move(areas)), std::move(theta)};
}

namespace {

double mean_sq_error(std::span<const double> est, std::span<const double> truth) {
  double s = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) s += (est[i] - truth[i]) * (est[i] - truth[i]);
  return s / static_cast<double>(est.size());
}

std::pair<double, double> mean_and_se(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

struct ReplicateOutcome {
  bool ok = false;
  double eb_loss = 0.0;
  std::vector<double> beb_loss;
  bool eb_boundary = false;
  bool any_boot_interior = false;
  std::size_t failed_fits = 0;
};

template <class Model, class Generate>
CellLosses run_cell(const SimConfig& cfg, std::size_t cell_index, std::size_t m, double truth,
                    Generate&& generate) {
  const std::size_t B_max = *std::max_element(cfg.B_grid.begin(), cfg.B_grid.end());
  const typename Model::Options opts{};
  std::vector<ReplicateOutcome> outcomes(cfg.R);

  parallel_for(cfg.R, cfg.threads, [&](std::size_t r) {
    Stream data_rng = make_stream(cfg.seed, {cell_index, r, 0});
    auto gen = generate(data_rng);
    BootstrapSpec spec;
    spec.B = B_max;
    spec.scheme = cfg.scheme;
    spec.seed = derive_seed(cfg.seed, {cell_index, r, 1});
    spec.max_retries = cfg.max_retries;
    auto& out = outcomes[r];
    BebResult<Model> res;
    try {
      res = beb_estimate<Model>(gen.data, spec, opts, 1);
    } catch (const NumericalError&) {
      out.failed_fits = 1;
      return;
    } catch (const FitError&) {
      out.failed_fits = 1;
      return;
    }
    out.ok = true;
    out.failed_fits = res.n_failed;
    std::vector<double> eb(m);
    for (std::size_t i = 0; i < m; ++i) eb[i] = res.areas[i].eb;
    out.eb_loss = mean_sq_error(eb, gen.theta);
    for (auto B : cfg.B_grid) out.beb_loss.push_back(mean_sq_error(beb_prefix(res, B), gen.theta));
    out.eb_boundary = Model::on_boundary(res.fit.params, opts);
    out.any_boot_interior =
        std::any_of(res.bootstrap_params.begin(), res.bootstrap_params.end(),
                    [&](const auto& p) { return !Model::on_boundary(p, opts); });
  });

  CellLosses cell;
  cell.m = m;
  cell.truth = truth;
  cell.beb.resize(cfg.B_grid.size());
  cell.total_fits = cfg.R * (1 + B_max);
  for (const auto& o : outcomes) {
    cell.failed_fits += o.failed_fits;
    if (!o.ok) continue;
    cell.eb.push_back(o.eb_loss);
    for (std::size_t k = 0; k < cfg.B_grid.size(); ++k) cell.beb[k].push_back(o.beb_loss[k]);
    cell.eb_boundary.push_back(o.eb_boundary);
    cell.any_boot_interior.push_back(o.any_boot_interior);
  }
  const double failure_rate =
      static_cast<double>(cell.failed_fits) / static_cast<double>(cell.total_fits);
  if (failure_rate > 0.01 || cell.eb.empty()) {
    std::ostringstream msg;
    msg << "simulation cell (model=" << to_string(cfg.model) << ", m=" << m << ", truth=" << truth
        << ") lost " << cell.failed_fits << " of " << cell.total_fits
        << " fits (more than 1%); aborting";
    throw NumericalError(msg.str());
  }
  return cell;
}

}  // namespace

PairedGap paired_gap(const CellLosses& cell, std::size_t b_index) {
  const auto& beb = cell.beb.at(b_index);
  std::vector<double> d(cell.eb.size());
  for (std::size_t r = 0; r < d.size(); ++r) d[r] = cell.eb[r] - beb[r];
  const auto [mean, se] = mean_and_se(d);
  return {mean, se, d.size()};
}

SimResult run_study(const SimConfig& cfg) {
  validate(cfg);
  SimResult result;
  result.config = cfg;
  std::size_t cell_index = 0;
  for (auto m : cfg.m_grid) {
    for (double truth : cfg.hyper_grid) {
      CellLosses cell;
      if (cfg.model == ModelKind::FH) {
        const auto D = design_D(m);
        cell = run_cell<FayHerriotModel>(cfg, cell_index, m, truth, [&](Stream& rng) {
          return generate_fh(D, truth, cfg.mu, rng);
        });
      } else {
        const auto n = design_n(m);
        cell = run_cell<PoissonGammaModel>(cfg, cell_index, m, truth, [&](Stream& rng) {
          return generate_pg(n, truth, cfg.mu, rng);
        });
      }
      const auto [eb_mse, eb_se] = mean_and_se(cell.eb);
      result.rows.push_back({cfg.model, m, truth, "EB", 0, eb_mse, eb_se, cell.eb.size()});
      for (std::size_t k = 0; k < cfg.B_grid.size(); ++k) {
        const auto [mse, se] = mean_and_se(cell.beb[k]);
        result.rows.push_back({cfg.model, m, truth, "BEB", cfg.B_grid[k], mse, se, cell.eb.size()});
      }
      result.cells.push_back(std::move(cell));
      ++cell_index;
    }
  }
  return result;
}

void write_csv(std::ostream& out, const SimResult& result) {
  out << "model,m,truth,estimator,B,mse,mc_se,R\n";
  for (const auto& r : result.rows)
    out << to_string(r.model) << ',' << r.m << ',' << format_double(r.truth) << ',' << r.estimator
        << ',' << r.B << ',' << format_double(r.mse) << ',' << format_double(r.mc_se) << ','
        << r.R << '\n';
}

}  // namespace beb
