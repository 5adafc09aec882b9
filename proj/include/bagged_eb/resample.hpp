#pragma once

#include <vector>

#include "bagged_eb/dataset.hpp"
#include "bagged_eb/params.hpp"
#include "bagged_eb/random.hpp"

namespace beb {

/// Draws m whole areas uniformly with replacement, in draw order. Each area
/// keeps its response, variance or exposure, and covariates together.
template <class Area, class URBG>
Dataset<Area> resample_nonparametric(const Dataset<Area>& data, URBG& rng) {
  std::vector<Area> out;
  out.reserve(data.size());
  for (std::size_t k = 0; k < data.size(); ++k)
    out.push_back(data[uniform_index(rng, data.size())]);
  return Dataset<Area>(std::move(out), IdPolicy::AllowDuplicates);
}

/// Redraws theta_i ~ N(x_i'beta, A) then y_i ~ N(theta_i, D_i); D and x kept.
GaussianDataset resample_parametric(const GaussianDataset& data, const FhParams& params,
                                    Stream& rng);

/// Redraws theta_i ~ Gamma(shape nu*exp(x_i'beta), rate nu) then
/// z_i ~ Poisson(n_i * theta_i); n and x kept.
CountDataset resample_parametric(const CountDataset& data, const PgParams& params, Stream& rng);

}  // namespace beb
