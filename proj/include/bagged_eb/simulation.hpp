#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "bagged_eb/bagging.hpp"
#include "bagged_eb/dataset.hpp"
#include "bagged_eb/random.hpp"

namespace beb {

enum class ModelKind { FH, PG };

std::string_view to_string(ModelKind k);
ModelKind parse_model(std::string_view s);

/// Full factorial Monte Carlo design: one cell per (m, truth) pair.
/// truth is A for the normal model and nu for the Poisson-gamma model.
struct SimConfig {
  ModelKind model = ModelKind::FH;
  std::vector<std::size_t> m_grid;
  std::vector<double> hyper_grid;
  double mu = 0.0;
  std::size_t R = 500;
  std::vector<std::size_t> B_grid;
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::Nonparametric;
  std::size_t max_retries = 10;
  unsigned threads = 0;  // 0 = one per hardware thread; never affects results
};

/// Reduced-scale profile (R=500, B=25, m in {10,20,30}) or, with
/// `full_scale`, R=5000, m = 10,15,...,40 and B in {25,50,100}.
SimConfig default_config(ModelKind model, bool full_scale = false);
void validate(const SimConfig& cfg);

/// m equally spaced sampling variances from 0.5 to 1.5 inclusive.
std::vector<double> design_D(std::size_t m);

/// m equally spaced points from 10 to 50, rounded half away from zero.
std::vector<std::int64_t> design_n(std::size_t m);

/// Mean of squared errors over every (replicate, area) pair.
double simulated_mse(const std::vector<std::vector<double>>& estimates,
                     const std::vector<std::vector<double>>& truths);

template <class Area>
struct Generated {
  Dataset<Area> data;
  std::vector<double> theta;
};

/// theta_i ~ N(mu, A), y_i ~ N(theta_i, D_i), intercept-only design.
Generated<GaussianArea> generate_fh(std::span<const double> D, double A, double mu, Stream& rng);

/// theta_i ~ Gamma(shape nu*mu, rate nu), z_i ~ Poisson(n_i theta_i).
Generated<CountArea> generate_pg(std::span<const std::int64_t> n, double nu, double mu,
                                 Stream& rng);

struct SimRow {
  ModelKind model;
  std::size_t m;
  double truth;
  std::string estimator;  // "EB" or "BEB"
  std::size_t B;          // 0 for EB
  double mse;
  double mc_se;
  std::size_t R;  // replicates that entered the average
};

/// Per-replicate losses of one cell: loss = mean_i (estimate_i - theta_i)^2.
/// EB and every BEB(B) are evaluated on the same generated datasets.
struct CellLosses {
  std::size_t m = 0;
  double truth = 0.0;
  std::vector<double> eb;
  std::vector<std::vector<double>> beb;  // [index into B_grid][replicate]
  std::vector<bool> eb_boundary;         // original-data fit on the parameter boundary
  std::vector<bool> any_boot_interior;   // some bootstrap fit off the boundary
  std::size_t failed_fits = 0;
  std::size_t total_fits = 0;
};

struct SimResult {
  SimConfig config;
  std::vector<SimRow> rows;
  std::vector<CellLosses> cells;
};

struct PairedGap {
  double mean = 0.0;  // mean of loss(EB) - loss(BEB)
  double se = 0.0;
  std::size_t R = 0;
};

PairedGap paired_gap(const CellLosses& cell, std::size_t b_index);

/// Runs every cell; deterministic given cfg.seed regardless of cfg.threads.
/// Throws NumericalError if any cell loses more than 1% of its fits.
SimResult run_study(const SimConfig& cfg);

/// `model,m,truth,estimator,B,mse,mc_se,R`
void write_csv(std::ostream& out, const SimResult& result);

}  // namespace beb
