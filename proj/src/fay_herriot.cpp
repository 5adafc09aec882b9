#include "bagged_eb/fay_herriot.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "bagged_eb/optimize.hpp"

namespace beb {

namespace {

Eigen::MatrixXd design(std::span<const GaussianArea> areas) {
  const auto m = static_cast<Eigen::Index>(areas.size());
  const auto p = static_cast<Eigen::Index>(areas.front().x.size());
  Eigen::MatrixXd X(m, p);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < p; ++j) X(i, j) = areas[i].x[j];
  return X;
}

Eigen::VectorXd response(std::span<const GaussianArea> areas) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(areas.size()));
  for (std::size_t i = 0; i < areas.size(); ++i) y[static_cast<Eigen::Index>(i)] = areas[i].y;
  return y;
}

// Profile of the criterion in A with beta at its GLS value.
class Profile {
 public:
  explicit Profile(std::span<const GaussianArea> areas)
      : X_(design(areas)), y_(response(areas)), D_(X_.rows()) {
    for (Eigen::Index i = 0; i < D_.size(); ++i) D_[i] = areas[static_cast<std::size_t>(i)].D;
  }

  Eigen::VectorXd beta(double A) const {
    const Eigen::VectorXd w = (D_.array() + A).inverse();
    const Eigen::MatrixXd XtWX = X_.transpose() * w.asDiagonal() * X_;
    const Eigen::VectorXd XtWy = X_.transpose() * (w.array() * y_.array()).matrix();
    return XtWX.ldlt().solve(XtWy);
  }

  double value(double A) const {
    const Eigen::VectorXd r = y_ - X_ * beta(A);
    const Eigen::ArrayXd v = D_.array() + A;
    return v.log().sum() + (r.array().square() / v).sum();
  }

  // d/dA of the profile; the beta term drops out at the GLS solution.
  double slope(double A) const {
    const Eigen::VectorXd r = y_ - X_ * beta(A);
    const Eigen::ArrayXd v = D_.array() + A;
    return v.inverse().sum() - (r.array().square() / v.square()).sum();
  }

  const Eigen::MatrixXd& X() const { return X_; }
  double max_D() const { return D_.maxCoeff(); }

 private:
  Eigen::MatrixXd X_;
  Eigen::VectorXd y_;
  Eigen::VectorXd D_;
};

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

double fh_criterion(const FhParams& params, std::span<const GaussianArea> areas) {
  if (areas.empty()) throw InputError("fh_criterion: no areas");
  if (!(params.A >= 0.0)) throw InputError("fh_criterion: A must be >= 0");
  if (params.beta.size() != areas.front().x.size())
    throw InputError("fh_criterion: beta length does not match covariate dimension");
  double q = 0.0;
  for (const auto& a : areas) {
    const double v = params.A + a.D;
    const double r = a.y - linear_predictor(a.x, params.beta);
    q += std::log(v) + r * r / v;
  }
  if (!std::isfinite(q)) throw NumericalError("fh_criterion: non-finite value");
  return q;
}

std::vector<double> fh_gls_beta(std::span<const GaussianArea> areas, double A) {
  return to_std(Profile(areas).beta(A));
}

FhFitReport fh_fit_ml(const GaussianDataset& data, const FhOptions& opts) {
  const std::size_t m = data.size(), p = data.dim();
  if (m <= p)
    throw FitError("fay-herriot fit needs more areas than covariates (m=" + std::to_string(m) +
                   ", p=" + std::to_string(p) + ")");
  const Profile profile(data.areas());
  {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(profile.X());
    if (qr.rank() < static_cast<Eigen::Index>(p))
      throw FitError("fay-herriot fit: design matrix is rank deficient (collinear covariates)");
  }

  const double A_max = opts.A_max > 0.0 ? opts.A_max : 100.0 * profile.max_D();

  // Coarse scan: 0 plus a geometric grid up to A_max.
  constexpr int kGrid = 80;
  std::vector<double> grid{0.0};
  for (int k = 0; k < kGrid; ++k)
    grid.push_back(A_max * std::pow(10.0, -8.0 + 8.0 * k / (kGrid - 1)));
  std::size_t best = 0;
  double best_q = profile.value(0.0);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double q = profile.value(grid[k]);
    if (q < best_q) {
      best_q = q;
      best = k;
    }
  }
  if (!std::isfinite(best_q)) throw NumericalError("fay-herriot fit: non-finite criterion");

  const auto slope = [&](double A) { return profile.slope(A); };
  const auto value = [&](double A) { return profile.value(A); };
  double A_hat = grid[best];
  int iterations = 0;
  bool converged = true;

  const double lo = best == 0 ? 0.0 : grid[best - 1];
  const double hi = best + 1 < grid.size() ? grid[best + 1] : A_max;
  if (best == 0 && slope(0.0) >= 0.0) {
    A_hat = 0.0;
  } else if (best + 1 == grid.size() && slope(A_max) <= 0.0) {
    A_hat = A_max;
  } else if (slope(lo) < 0.0 && slope(hi) > 0.0) {
    const auto r = optim::bisect_increasing(slope, lo, hi, opts.tol, opts.max_iter);
    A_hat = r.x;
    iterations = r.iterations;
    converged = r.converged;
  } else {
    const auto r = optim::golden_section(value, lo, hi, opts.tol, opts.max_iter);
    A_hat = value(r.x) < best_q ? r.x : grid[best];
    iterations = r.iterations;
    converged = r.converged;
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "fay-herriot fit did not converge in " << opts.max_iter
        << " iterations (bracket [" << lo << ", " << hi << "], current A=" << A_hat << ")";
    throw FitError(msg.str());
  }

  FhFitReport rep;
  rep.params.A = A_hat;
  rep.params.beta = to_std(profile.beta(A_hat));
  rep.neg2loglik = fh_criterion(rep.params, data.areas());
  rep.boundary_hit = A_hat == 0.0;
  rep.iterations = iterations;
  return rep;
}

double fh_bayes(const GaussianArea& area, const FhParams& params) {
  const double mean = linear_predictor(area.x, params.beta);
  if (params.A == 0.0) return mean;
  return mean + params.A / (params.A + area.D) * (area.y - mean);
}

std::vector<double> fh_eb(const GaussianDataset& data, const FhOptions& opts) {
  const auto fit = fh_fit_ml(data, opts);
  std::vector<double> out;
  out.reserve(data.size());
  for (const auto& a : data) out.push_back(fh_bayes(a, fit.params));
  return out;
}

}  // namespace beb
