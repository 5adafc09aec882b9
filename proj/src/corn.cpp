#include "bagged_eb/corn.hpp"

namespace beb {

GaussianDataset corn_dataset() {
  std::vector<GaussianArea> areas;
  areas.reserve(kCornTable.size());
  for (const auto& row : kCornTable)
    areas.push_back({std::string(row.county), row.direct, row.sd * row.sd, {1.0}});
  return GaussianDataset(std::move(areas));
}

}  // namespace beb
