#include "bagged_eb/resample.hpp"

#include <cmath>
#include <string>

namespace beb {

namespace {
void check_beta(const std::vector<double>& beta, std::size_t dim) {
  if (beta.size() != dim)
    throw InputError("beta has " + std::to_string(beta.size()) + " entries, dataset has " +
                     std::to_string(dim) + " covariates");
  for (double b : beta)
    if (!std::isfinite(b)) throw InputError("beta must be finite");
}
}  // namespace

void validate(const FhParams& p, std::size_t dim) {
  check_beta(p.beta, dim);
  if (!(p.A >= 0.0) || !std::isfinite(p.A)) throw InputError("A must be finite and >= 0");
}

void validate(const PgParams& p, std::size_t dim) {
  check_beta(p.beta, dim);
  if (!(p.nu > 0.0) || !std::isfinite(p.nu)) throw InputError("nu must be finite and > 0");
}

GaussianDataset resample_parametric(const GaussianDataset& data, const FhParams& params,
                                    Stream& rng) {
  validate(params, data.dim());
  std::normal_distribution<double> std_normal(0.0, 1.0);
  std::vector<GaussianArea> out(data.begin(), data.end());
  const double prior_sd = std::sqrt(params.A);
  for (auto& a : out) {
    const double theta = linear_predictor(a.x, params.beta) + prior_sd * std_normal(rng);
    a.y = theta + std::sqrt(a.D) * std_normal(rng);
  }
  return GaussianDataset(std::move(out), IdPolicy::AllowDuplicates);
}

CountDataset resample_parametric(const CountDataset& data, const PgParams& params, Stream& rng) {
  validate(params, data.dim());
  std::vector<CountArea> out(data.begin(), data.end());
  for (auto& a : out) {
    const double shape = params.nu * std::exp(linear_predictor(a.x, params.beta));
    std::gamma_distribution<double> prior(shape, 1.0 / params.nu);
    const double theta = prior(rng);
    const double rate = a.n * theta;
    a.z = rate > 0.0 ? std::poisson_distribution<std::int64_t>(rate)(rng) : 0;
  }
  return CountDataset(std::move(out), IdPolicy::AllowDuplicates);
}

}  // namespace beb
