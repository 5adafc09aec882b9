#include "bagged_eb/poisson_gamma.hpp"

#include <Eigen/Dense>
#include <boost/math/policies/policy.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <algorithm>
#include <cmath>
#include <limits>

#include "bagged_eb/optimize.hpp"

namespace beb {

namespace {

using NoThrow = boost::math::policies::policy<
    boost::math::policies::pole_error<boost::math::policies::errno_on_error>,
    boost::math::policies::overflow_error<boost::math::policies::errno_on_error>,
    boost::math::policies::domain_error<boost::math::policies::errno_on_error>,
    boost::math::policies::evaluation_error<boost::math::policies::errno_on_error>>;

constexpr std::int64_t kDirectSumLimit = 64;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double log_gamma(double x) { return boost::math::lgamma(x, NoThrow()); }

// lgamma(a + z) - lgamma(a). Small counts use the rising-factorial sum, which
// stays accurate when a is huge (nu near its upper bound).
double log_gamma_ratio(double a, std::int64_t z) {
  if (z <= kDirectSumLimit) {
    double s = 0.0;
    for (std::int64_t k = 0; k < z; ++k) s += std::log(a + static_cast<double>(k));
    return s;
  }
  return log_gamma(a + static_cast<double>(z)) - log_gamma(a);
}

// digamma(a + z) - digamma(a).
double digamma_ratio(double a, std::int64_t z) {
  if (z <= kDirectSumLimit) {
    double s = 0.0;
    for (std::int64_t k = 0; k < z; ++k) s += 1.0 / (a + static_cast<double>(k));
    return s;
  }
  return boost::math::digamma(a + static_cast<double>(z), NoThrow()) -
         boost::math::digamma(a, NoThrow());
}

// Non-throwing core; NaN marks an unrepresentable evaluation.
double logpmf_raw(const CountArea& area, std::span<const double> beta, double nu) {
  const double a = nu * std::exp(linear_predictor(area.x, beta));
  if (!(a > 0.0) || !std::isfinite(a)) return kNaN;
  const double z = static_cast<double>(area.z);
  const double v = log_gamma_ratio(a, area.z) - log_gamma(z + 1.0) -
                   z * std::log1p(nu / area.n) - a * std::log1p(area.n / nu);
  return std::isfinite(v) ? v : kNaN;
}

double loglik_raw(std::span<const CountArea> areas, std::span<const double> beta, double nu) {
  double s = 0.0;
  for (const auto& a : areas) s += logpmf_raw(a, beta, nu);
  return s;
}

// Gradient in (beta, eta = log nu).
Eigen::VectorXd gradient_raw(std::span<const CountArea> areas, std::span<const double> beta,
                             double nu) {
  const std::size_t p = beta.size();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p + 1));
  for (const auto& area : areas) {
    const double a = nu * std::exp(linear_predictor(area.x, beta));
    const double z = static_cast<double>(area.z);
    const double da = digamma_ratio(a, area.z) - std::log1p(area.n / nu);
    for (std::size_t j = 0; j < p; ++j) g[static_cast<Eigen::Index>(j)] += da * a * area.x[j];
    g[static_cast<Eigen::Index>(p)] += da * a + (a * area.n - z * nu) / (area.n + nu);
  }
  return g;
}

struct Point {
  std::vector<double> beta;
  double eta;
};

Point split(const std::vector<double>& theta) {
  return {std::vector<double>(theta.begin(), theta.end() - 1), theta.back()};
}

Eigen::MatrixXd design(std::span<const CountArea> areas) {
  const auto m = static_cast<Eigen::Index>(areas.size());
  const auto p = static_cast<Eigen::Index>(areas.front().x.size());
  Eigen::MatrixXd X(m, p);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < p; ++j) X(i, j) = areas[static_cast<std::size_t>(i)].x[j];
  return X;
}

// Least squares on log((z + 0.5) / n), intercept shifted to match total
// counts; nu from the moment identity Var(z/n) = mu/nu + mean(mu/n).
std::vector<double> initial_point(std::span<const CountArea> areas, const Eigen::MatrixXd& X,
                                  const PgOptions& opts) {
  const auto m = X.rows();
  Eigen::VectorXd t(m);
  double total_z = 0.0, total_n = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& a = areas[static_cast<std::size_t>(i)];
    t[i] = std::log((static_cast<double>(a.z) + 0.5) / a.n);
    total_z += static_cast<double>(a.z);
    total_n += a.n;
  }
  Eigen::VectorXd beta = X.colPivHouseholderQr().solve(t);
  double expected = 0.0;
  for (Eigen::Index i = 0; i < m; ++i)
    expected += areas[static_cast<std::size_t>(i)].n * std::exp(X.row(i).dot(beta));
  beta[0] += std::log(total_z / expected);

  const double mu = total_z / total_n;
  double mean_rate = 0.0, poisson_part = 0.0;
  for (const auto& a : areas) {
    mean_rate += static_cast<double>(a.z) / a.n;
    poisson_part += mu / a.n;
  }
  mean_rate /= static_cast<double>(m);
  poisson_part /= static_cast<double>(m);
  double var = 0.0;
  for (const auto& a : areas) {
    const double d = static_cast<double>(a.z) / a.n - mean_rate;
    var += d * d;
  }
  var /= static_cast<double>(m - 1);
  const double excess = var - poisson_part;
  double nu0 = excess > 0.0 ? mu / excess : 1e4;
  nu0 = std::clamp(nu0, 1e-3, 1e6);

  std::vector<double> theta(beta.data(), beta.data() + beta.size());
  theta.push_back(std::clamp(std::log(nu0), opts.log_nu_min, opts.log_nu_max));
  return theta;
}

}  // namespace

double pg_nb_logpmf(const CountArea& area, const PgParams& params) {
  validate(params, area.x.size());
  const double v = logpmf_raw(area, params.beta, params.nu);
  if (std::isnan(v))
    throw NumericalError("pg_nb_logpmf: evaluation failed for area '" + area.id +
                         "' (nu*m out of range)");
  return v;
}

double pg_marginal_loglik(const PgParams& params, std::span<const CountArea> areas) {
  double s = 0.0;
  for (const auto& a : areas) s += pg_nb_logpmf(a, params);
  return s;
}

std::vector<double> pg_loglik_gradient(const PgParams& params, std::span<const CountArea> areas) {
  if (areas.empty()) throw InputError("pg_loglik_gradient: no areas");
  validate(params, areas.front().x.size());
  const auto g = gradient_raw(areas, params.beta, params.nu);
  return {g.data(), g.data() + g.size()};
}

PgFitReport pg_fit_ml(const CountDataset& data, const PgOptions& opts) {
  const std::size_t m = data.size(), p = data.dim();
  const auto areas = data.areas();
  if (m <= p)
    throw FitError("poisson-gamma fit needs more areas than covariates (m=" + std::to_string(m) +
                   ", p=" + std::to_string(p) + ")");
  if (std::all_of(areas.begin(), areas.end(), [](const CountArea& a) { return a.z == 0; }))
    throw FitError("poisson-gamma fit: all counts are zero (likelihood has no maximum)");
  const Eigen::MatrixXd X = design(areas);
  if (Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(X).rank() < static_cast<Eigen::Index>(p))
    throw FitError("poisson-gamma fit: design matrix is rank deficient (collinear covariates)");

  const auto negloglik = [&](const std::vector<double>& theta) {
    const auto [beta, eta] = split(theta);
    const double v = loglik_raw(areas, beta, std::exp(eta));
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : -v;
  };

  optim::NelderMeadOptions nm;
  nm.initial_step.assign(p + 1, 0.25);
  nm.initial_step.back() = 1.0;
  nm.lower.assign(p + 1, -std::numeric_limits<double>::infinity());
  nm.upper.assign(p + 1, std::numeric_limits<double>::infinity());
  nm.lower.back() = opts.log_nu_min;
  nm.upper.back() = opts.log_nu_max;
  nm.f_tol = 1e-13;
  nm.x_tol = 1e-7;
  nm.max_iter = opts.max_iter;
  auto start = nelder_mead(negloglik, initial_point(areas, X, opts), nm);

  // Damped Newton on the free coordinates; log(nu) is frozen while it sits on
  // a bound with the gradient pushing outward.
  std::vector<double> theta = start.x;
  double f = start.value;
  const auto n = static_cast<Eigen::Index>(p + 1);
  int newton_iter = 0;
  double last_change = std::numeric_limits<double>::infinity();
  double grad_norm = std::numeric_limits<double>::infinity();
  auto projected_gradient = [&](const std::vector<double>& th, std::vector<bool>& free) {
    const auto [beta, eta] = split(th);
    Eigen::VectorXd g = gradient_raw(areas, beta, std::exp(eta));
    free.assign(p + 1, true);
    if ((eta >= opts.log_nu_max && g[n - 1] > 0.0) || (eta <= opts.log_nu_min && g[n - 1] < 0.0)) {
      free[p] = false;
      g[n - 1] = 0.0;
    }
    return g;
  };

  std::vector<bool> free;
  for (; newton_iter < 100; ++newton_iter) {
    const Eigen::VectorXd g = projected_gradient(theta, free);
    grad_norm = g.norm();
    if (!std::isfinite(grad_norm)) break;
    if (grad_norm < 1e-3 * opts.grad_tol && last_change < opts.tol) break;

    // Hessian of the log-likelihood by central differences of the gradient.
    Eigen::MatrixXd H(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double h = 1e-5 * (1.0 + std::abs(theta[static_cast<std::size_t>(j)]));
      auto up = theta, down = theta;
      up[static_cast<std::size_t>(j)] += h;
      down[static_cast<std::size_t>(j)] -= h;
      const auto [bu, eu] = split(up);
      const auto [bd, ed] = split(down);
      H.col(j) = (gradient_raw(areas, bu, std::exp(eu)) - gradient_raw(areas, bd, std::exp(ed))) /
                 (2.0 * h);
    }
    H = 0.5 * (H + H.transpose()).eval();
    for (Eigen::Index j = 0; j < n; ++j)
      if (!free[static_cast<std::size_t>(j)]) {
        H.row(j).setZero();
        H.col(j).setZero();
        H(j, j) = -1.0;
      }

    // Newton step on a positive-definite modification of -H: eigenvalues are
    // made positive and floored, so the flat nu -> infinity direction gets a
    // long step (the line search trims it) without spoiling the beta block.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(-H);
    Eigen::VectorXd lambda = eig.eigenvalues().cwiseAbs();
    const double floor = std::max(1e-8 * lambda.maxCoeff(), 1e-12);
    lambda = lambda.cwiseMax(floor);
    Eigen::VectorXd step =
        eig.eigenvectors() * (eig.eigenvectors().transpose() * g).cwiseQuotient(lambda);
    if (!step.allFinite()) step = g / std::max(1.0, g.norm());

    double t = 1.0;
    bool accepted = false;
    for (int half = 0; half < 40; ++half, t *= 0.5) {
      auto trial = theta;
      for (Eigen::Index j = 0; j < n; ++j) trial[static_cast<std::size_t>(j)] += t * step[j];
      trial.back() = std::clamp(trial.back(), opts.log_nu_min, opts.log_nu_max);
      const double ft = negloglik(trial);
      // Near the optimum the objective stops resolving improvements before
      // the (exact) gradient does; there a step that keeps f flat to rounding
      // and shrinks the gradient is taken.
      std::vector<bool> trial_free;
      const bool better = ft < f || (ft <= f + 1e-13 * (1.0 + std::abs(f)) &&
                                     projected_gradient(trial, trial_free).norm() < 0.5 * grad_norm);
      if (better) {
        last_change = std::max(0.0, f - ft);
        theta = std::move(trial);
        f = ft;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      last_change = 0.0;
      break;
    }
  }
  grad_norm = projected_gradient(theta, free).norm();

  PgFitReport rep;
  auto [beta, eta] = split(theta);
  rep.params.beta = std::move(beta);
  rep.params.nu = std::exp(eta);
  rep.loglik = -f;
  rep.iterations = start.iterations + newton_iter;
  rep.nu_at_bound = eta <= opts.log_nu_min || eta >= opts.log_nu_max;
  rep.gradient_norm = grad_norm;
  rep.converged = std::isfinite(f) && last_change < opts.tol && grad_norm < opts.grad_tol;
  return rep;
}

double pg_bayes(const CountArea& area, const PgParams& params) {
  const double mean = std::exp(linear_predictor(area.x, params.beta));
  return (static_cast<double>(area.z) + params.nu * mean) / (area.n + params.nu);
}

std::vector<double> pg_eb(const CountDataset& data, const PgOptions& opts) {
  const auto fit = pg_fit_ml(data, opts);
  std::vector<double> out;
  out.reserve(data.size());
  for (const auto& a : data) out.push_back(pg_bayes(a, fit.params));
  return out;
}

}  // namespace beb
