#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "bagged_eb/fay_herriot.hpp"
#include "bagged_eb/poisson_gamma.hpp"
#include "bagged_eb/resample.hpp"

namespace beb {

// Adapters giving the bagging and simulation code one interface over both
// hierarchical models.

struct FayHerriotModel {
  using Area = GaussianArea;
  using Params = FhParams;
  using Fit = FhFitReport;
  using Options = FhOptions;
  static constexpr std::string_view name = "fh";

  static Fit fit(const Dataset<Area>& data, const Options& opts) { return fh_fit_ml(data, opts); }
  static double bayes(const Area& a, const Params& p) { return fh_bayes(a, p); }
  static double direct(const Area& a) { return a.y; }
  static bool on_boundary(const Params& p, const Options&) { return p.A == 0.0; }
  static Dataset<Area> parametric(const Dataset<Area>& d, const Params& p, Stream& rng) {
    return resample_parametric(d, p, rng);
  }
  static std::vector<double> flatten(const Params& p) {
    auto v = p.beta;
    v.push_back(p.A);
    return v;
  }
  static std::vector<std::string> param_names(std::size_t dim) {
    std::vector<std::string> names;
    for (std::size_t j = 0; j < dim; ++j) names.push_back("beta_" + std::to_string(j));
    names.emplace_back("A");
    return names;
  }
};

struct PoissonGammaModel {
  using Area = CountArea;
  using Params = PgParams;
  using Fit = PgFitReport;
  using Options = PgOptions;
  static constexpr std::string_view name = "pg";

  static Fit fit(const Dataset<Area>& data, const Options& opts) { return pg_fit_ml(data, opts); }
  static double bayes(const Area& a, const Params& p) { return pg_bayes(a, p); }
  static double direct(const Area& a) { return static_cast<double>(a.z) / a.n; }
  static bool on_boundary(const Params& p, const Options& o) {
    const double eta = std::log(p.nu);
    return eta <= o.log_nu_min || eta >= o.log_nu_max;
  }
  static Dataset<Area> parametric(const Dataset<Area>& d, const Params& p, Stream& rng) {
    return resample_parametric(d, p, rng);
  }
  static std::vector<double> flatten(const Params& p) {
    auto v = p.beta;
    v.push_back(p.nu);
    return v;
  }
  static std::vector<std::string> param_names(std::size_t dim) {
    std::vector<std::string> names;
    for (std::size_t j = 0; j < dim; ++j) names.push_back("beta_" + std::to_string(j));
    names.emplace_back("nu");
    return names;
  }
};

}  // namespace beb
