#pragma once

#include <span>
#include <vector>

#include "bagged_eb/dataset.hpp"
#include "bagged_eb/params.hpp"

namespace beb {

struct FhOptions {
  double A_max = 0.0;  // upper end of the search for A; 0 selects 100 * max_i D_i
  double tol = 1e-10;  // relative tolerance on A
  int max_iter = 200;
};

struct FhFitReport {
  FhParams params;
  double neg2loglik = 0.0;    // criterion value at the optimum
  bool boundary_hit = false;  // true iff A == 0
  int iterations = 0;
};

/// Q(beta, A) = sum log(A + D_i) + sum (y_i - x_i'beta)^2 / (A + D_i), i.e.
/// -2 log-likelihood of y_i ~ N(x_i'beta, A + D_i) up to a constant.
/// Minimized by the ML estimate.
double fh_criterion(const FhParams& params, std::span<const GaussianArea> areas);

/// Generalized least squares coefficients for fixed A (weights 1 / (A + D_i)).
std::vector<double> fh_gls_beta(std::span<const GaussianArea> areas, double A);

/// Maximum likelihood fit. beta is profiled out by GLS, and the profile in A
/// is scanned on [0, A_max] then refined by bisection on its derivative.
/// A = 0 is a legitimate optimum and is reported through boundary_hit.
FhFitReport fh_fit_ml(const GaussianDataset& data, const FhOptions& opts = {});

/// Posterior mean x'beta + A / (A + D) * (y - x'beta).
double fh_bayes(const GaussianArea& area, const FhParams& params);

/// EB estimates: fh_bayes at the ML fit, in dataset order.
std::vector<double> fh_eb(const GaussianDataset& data, const FhOptions& opts = {});

}  // namespace beb
