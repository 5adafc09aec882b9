#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "bagged_eb/errors.hpp"

namespace beb {

/// One area of the two-stage normal model: direct estimate y with known
/// sampling variance D. The covariate vector starts with the intercept 1.
struct GaussianArea {
  std::string id;
  double y = 0.0;
  double D = 1.0;
  std::vector<double> x{1.0};
};

/// One area of the Poisson-gamma model: count z observed over exposure n.
struct CountArea {
  std::string id;
  std::int64_t z = 0;
  double n = 1.0;
  std::vector<double> x{1.0};
};

inline double linear_predictor(std::span<const double> x, std::span<const double> beta) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += x[j] * beta[j];
  return s;
}

void validate_area(const GaussianArea& a);
void validate_area(const CountArea& a);

enum class IdPolicy { Unique, AllowDuplicates };

/// Immutable, homogeneous collection of areas (m >= 2, common covariate
/// dimension). Bootstrap resamples are built with IdPolicy::AllowDuplicates.
template <class Area>
class Dataset {
 public:
  using area_type = Area;

  explicit Dataset(std::vector<Area> areas, IdPolicy ids = IdPolicy::Unique)
      : areas_(std::move(areas)) {
    if (areas_.size() < 2)
      throw InputError("dataset needs at least 2 areas, got " + std::to_string(areas_.size()));
    const std::size_t p = areas_.front().x.size();
    if (p == 0) throw InputError("covariate vector must contain at least the intercept");
    std::unordered_set<std::string> seen;
    for (const auto& a : areas_) {
      validate_area(a);
      if (a.x.size() != p)
        throw InputError("area '" + a.id + "' has " + std::to_string(a.x.size()) +
                         " covariates, expected " + std::to_string(p));
      if (ids == IdPolicy::Unique && !seen.insert(a.id).second)
        throw InputError("duplicate area id '" + a.id + "'");
    }
  }

  std::size_t size() const noexcept { return areas_.size(); }
  std::size_t dim() const noexcept { return areas_.front().x.size(); }
  std::span<const Area> areas() const noexcept { return areas_; }
  const Area& operator[](std::size_t i) const { return areas_[i]; }
  auto begin() const noexcept { return areas_.begin(); }
  auto end() const noexcept { return areas_.end(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<Area> areas_;
};

bool operator==(const GaussianArea&, const GaussianArea&);
bool operator==(const CountArea&, const CountArea&);

using GaussianDataset = Dataset<GaussianArea>;
using CountDataset = Dataset<CountArea>;

enum class DatasetKind { Gaussian, Count };

/// Inspects the header line: `id,y,D,...` is Gaussian, `id,z,n,...` is Count.
DatasetKind detect_kind(std::istream& in);

/// CSV readers. Header required; covariate columns follow the first three and
/// the intercept is prepended at load time. Errors name the offending line.
/// When `covariate_names` is given it receives the covariate header names.
GaussianDataset read_gaussian_csv(std::istream& in,
                                  std::vector<std::string>* covariate_names = nullptr);
CountDataset read_count_csv(std::istream& in,
                            std::vector<std::string>* covariate_names = nullptr);
GaussianDataset load_gaussian_csv(const std::filesystem::path& path,
                                  std::vector<std::string>* covariate_names = nullptr);
CountDataset load_count_csv(const std::filesystem::path& path,
                            std::vector<std::string>* covariate_names = nullptr);

/// Writers emit the same layout (intercept dropped) with shortest round-trip
/// number formatting. `covariate_names` defaults to x1..xp.
void write_csv(std::ostream& out, const GaussianDataset& data,
               std::span<const std::string> covariate_names = {});
void write_csv(std::ostream& out, const CountDataset& data,
               std::span<const std::string> covariate_names = {});

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

}  // namespace beb
