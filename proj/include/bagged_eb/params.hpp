#pragma once

#include <vector>

namespace beb {

/// Fay-Herriot hyperparameters: regression coefficients and prior variance A.
struct FhParams {
  std::vector<double> beta;
  double A = 0.0;
};

/// Poisson-gamma hyperparameters: log-linear coefficients and prior scale nu.
/// The prior mean of area i is exp(x_i'beta); its variance is that mean / nu.
struct PgParams {
  std::vector<double> beta;
  double nu = 1.0;
};

void validate(const FhParams& p, std::size_t dim);
void validate(const PgParams& p, std::size_t dim);

}  // namespace beb
