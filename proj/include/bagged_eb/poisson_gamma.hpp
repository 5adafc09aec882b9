#pragma once

#include <span>
#include <vector>

#include "bagged_eb/dataset.hpp"
#include "bagged_eb/params.hpp"

namespace beb {

struct PgOptions {
  double tol = 1e-10;  // successive change in log-likelihood
  double grad_tol = 1e-6;
  int max_iter = 2000;
  // Search box for log(nu). The upper end stands in for nu -> infinity, the
  // no-overdispersion limit where the marginal collapses to Poisson.
  double log_nu_min = -12.0;
  double log_nu_max = 20.0;
};

struct PgFitReport {
  PgParams params;
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  bool nu_at_bound = false;    // log(nu) ended on an edge of the search box
  double gradient_norm = 0.0;  // projected, in (beta, log nu)
};

/// log f(z) of the negative-binomial marginal with shape a = nu * exp(x'beta):
/// lgamma(z+a) - lgamma(z+1) - lgamma(a) + z log(n/(n+nu)) + a log(nu/(n+nu)).
double pg_nb_logpmf(const CountArea& area, const PgParams& params);

double pg_marginal_loglik(const PgParams& params, std::span<const CountArea> areas);

/// Analytic gradient of pg_marginal_loglik with respect to (beta, log nu).
std::vector<double> pg_loglik_gradient(const PgParams& params, std::span<const CountArea> areas);

/// ML fit over (beta, log nu): Nelder-Mead from a moment-based start, then a
/// damped Newton polish with analytic gradients. Throws FitError when every
/// count is zero or the design is rank deficient; otherwise returns a report
/// with converged=false if the tolerances were not met.
PgFitReport pg_fit_ml(const CountDataset& data, const PgOptions& opts = {});

/// Posterior mean (z + nu m) / (n + nu), m = exp(x'beta).
double pg_bayes(const CountArea& area, const PgParams& params);

std::vector<double> pg_eb(const CountDataset& data, const PgOptions& opts = {});

}  // namespace beb
