#pragma once

#include <array>
#include <string_view>

#include "bagged_eb/dataset.hpp"

namespace beb {

/// One row of the Iowa corn reference table: direct estimate, its standard
/// deviation, and EB / BEB estimates computed elsewhere with a satellite
/// covariate that is not available here; those two columns are informational
/// and not reproducible from this data.
struct CornRow {
  std::string_view county;
  double direct;
  double sd;
  double reference_eb;
  double reference_beb;
};

inline constexpr std::array<CornRow, 8> kCornTable{{
    {"Franklin", 158.62, 5.70, 155.79, 141.08},
    {"Pocahontas", 102.52, 43.41, 102.82, 97.48},
    {"Winnebago", 112.77, 30.55, 119.74, 117.34},
    {"Wright", 144.30, 54.00, 127.86, 124.05},
    {"Webster", 117.59, 21.30, 109.61, 102.42},
    {"Hancock", 109.38, 15.66, 121.84, 126.51},
    {"Kossuth", 110.25, 12.11, 116.05, 118.53},
    {"Hardin", 120.05, 36.81, 136.97, 137.05},
}};

/// Intercept-only Gaussian dataset built from the table: y = DE, D = SD^2.
GaussianDataset corn_dataset();

}  // namespace beb
