#include <doctest.h>

#include <cmath>

#include "bagged_eb/corn.hpp"
#include "bagged_eb/fay_herriot.hpp"
#include "bagged_eb/optimize.hpp"
#include "bagged_eb/simulation.hpp"
#include "oracles.hpp"

using namespace beb;

namespace {

GaussianDataset intercept_only(const std::vector<double>& y, const std::vector<double>& D) {
  std::vector<GaussianArea> areas;
  for (std::size_t i = 0; i < y.size(); ++i) areas.push_back({std::to_string(i), y[i], D[i], {1.0}});
  return GaussianDataset(std::move(areas));
}

// Seeded draws from the m=10 normal design (mu=0, A=0.5), frozen to six
// decimals; optima from an independent 40-digit brute-force zoom search.
const std::vector<double> kInteriorY{0.824926, -0.612412, -0.571527, -2.449506, 1.714725,
                                     0.707131, 0.35887,   -0.139192, 0.348314,  -1.48442};
constexpr double kInteriorBeta = -0.11527037923000832;
constexpr double kInteriorA = 0.4603016589289381;
constexpr double kInteriorQ = 13.1170316367205;

const std::vector<double> kBoundaryY{-0.66643,  -0.045819, 0.481783, -2.112667, -0.705738,
                                     -1.737793, -1.364197, 0.430739, -0.369598, 0.168206};
constexpr double kBoundaryBeta = -0.5914308531459068;
constexpr double kBoundaryQ = 7.31543773078014;

}  // namespace

TEST_CASE("criterion: hand-evaluated cases") {
  const std::vector<GaussianArea> one{{"a", 0.0, 1.0, {1.0}}};
  CHECK(fh_criterion({{0.0}, 0.0}, one) == 0.0);
  const std::vector<GaussianArea> two{{"a", 1.0, 1.0, {1.0}}, {"b", -1.0, 1.0, {1.0}}};
  CHECK(fh_criterion({{0.0}, 1.0}, two) == doctest::Approx(2.0 * std::log(2.0) + 1.0).epsilon(1e-15));
  CHECK_THROWS_AS(fh_criterion({{0.0}, -0.1}, two), InputError);
}

TEST_CASE("criterion: shifting y and x'beta together leaves Q unchanged") {
  const auto corn = corn_dataset();
  std::vector<GaussianArea> shifted(corn.begin(), corn.end());
  for (auto& a : shifted) a.y += 37.5;
  for (double A : {0.0, 10.0, 400.0}) {
    const double q0 = fh_criterion({{120.0}, A}, corn.areas());
    const double q1 = fh_criterion({{157.5}, A}, shifted);
    CHECK(q1 == doctest::Approx(q0).epsilon(1e-12));
  }
}

TEST_CASE("fit: equal responses give the boundary estimate A = 0") {
  const auto d = intercept_only({3.25, 3.25, 3.25, 3.25, 3.25}, {1, 1, 1, 1, 1});
  const auto f = fh_fit_ml(d);
  CHECK(f.params.beta[0] == doctest::Approx(3.25).epsilon(1e-14));
  CHECK(f.params.A == 0.0);
  CHECK(f.boundary_hit);
  for (double v : fh_eb(d)) CHECK(v == doctest::Approx(3.25).epsilon(1e-14));
}

TEST_CASE("fit: frozen interior case matches the brute-force optimum") {
  const auto f = fh_fit_ml(intercept_only(kInteriorY, design_D(10)));
  CHECK_FALSE(f.boundary_hit);
  CHECK(std::abs(f.params.A - kInteriorA) < 1e-6);
  CHECK(std::abs(f.params.beta[0] - kInteriorBeta) < 1e-6);
  CHECK(std::abs(f.neg2loglik - kInteriorQ) < 1e-9);
}

TEST_CASE("fit: frozen boundary case") {
  const auto f = fh_fit_ml(intercept_only(kBoundaryY, design_D(10)));
  CHECK(f.boundary_hit);
  CHECK(f.params.A == 0.0);
  CHECK(std::abs(f.params.beta[0] - kBoundaryBeta) < 1e-9);
  CHECK(std::abs(f.neg2loglik - kBoundaryQ) < 1e-9);
}

TEST_CASE("fit: never worse than a 200x200 grid over (beta0, A)") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto rng = make_stream(seed, {11});
    const auto D = design_D(12);
    const auto gen = generate_fh(D, 0.3 + 0.1 * static_cast<double>(seed), 0.0, rng);
    const auto fit = fh_fit_ml(gen.data);
    std::vector<double> y;
    for (const auto& a : gen.data) y.push_back(a.y);
    const auto grid = oracle::zoom_grid(
        [&](double mu, double A) { return oracle::fh_q(y, D, mu, A); }, -3.0, 3.0, 0.0,
        100.0 * 1.5, 200, 0);
    CHECK(fit.neg2loglik <= grid.value + 1e-6);
  }
}

TEST_CASE("fit: agrees with a box-constrained simplex search when a covariate is present") {
  std::vector<GaussianArea> areas;
  auto rng = make_stream(5);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int i = 0; i < 15; ++i) {
    const double x = 0.3 * i;
    const double D = 0.5 + 0.05 * i;
    areas.push_back({std::to_string(i), 1.0 + 2.0 * x + std::sqrt(0.8) * z(rng) + std::sqrt(D) * z(rng), D, {1.0, x}});
  }
  const GaussianDataset d(areas);
  const auto fit = fh_fit_ml(d);
  optim::NelderMeadOptions o;
  o.lower = {-1e9, -1e9, 0.0};
  o.upper = {1e9, 1e9, 1e3};
  o.max_iter = 20000;
  o.x_tol = 1e-11;
  o.restarts = 5;
  const auto nm = optim::nelder_mead(
      [&](const std::vector<double>& t) { return fh_criterion({{t[0], t[1]}, t[2]}, d.areas()); },
      {0.0, 0.0, 1.0}, o);
  CHECK(fit.neg2loglik <= nm.value + 1e-9);
  CHECK(fit.params.A == doctest::Approx(nm.x[2]).epsilon(1e-4));
  CHECK(fit.params.beta[1] == doctest::Approx(nm.x[1]).epsilon(1e-4));
}

TEST_CASE("fit: profile optimality and location equivariance") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto rng = make_stream(seed, {12});
    const auto gen = generate_fh(design_D(10), 0.5, 0.0, rng);
    const auto fit = fh_fit_ml(gen.data);
    CHECK(fit.boundary_hit == (fit.params.A == 0.0));
    for (double delta : {1e-4, -1e-4}) {
      auto p = fit.params;
      p.beta[0] += delta;
      CHECK(fh_criterion(p, gen.data.areas()) >= fit.neg2loglik);
    }
    std::vector<GaussianArea> shifted(gen.data.begin(), gen.data.end());
    for (auto& a : shifted) a.y += 12.5;
    const auto fit2 = fh_fit_ml(GaussianDataset(shifted));
    CHECK(std::abs(fit2.params.A - fit.params.A) < 1e-8);
    CHECK(std::abs(fit2.params.beta[0] - fit.params.beta[0] - 12.5) < 1e-8);
  }
}

TEST_CASE("fit: error paths") {
  // m <= p
  CHECK_THROWS_AS(fh_fit_ml(GaussianDataset({{"a", 1.0, 1.0, {1.0, 0.0}}, {"b", 2.0, 1.0, {1.0, 1.0}}})),
                  FitError);
  // second covariate duplicates the intercept
  CHECK_THROWS_AS(fh_fit_ml(GaussianDataset({{"a", 1.0, 1.0, {1.0, 1.0}},
                                             {"b", 2.0, 1.0, {1.0, 1.0}},
                                             {"c", 0.0, 1.0, {1.0, 1.0}}})),
                  FitError);
  // an iteration cap of 1 cannot reach the tolerance for an interior optimum
  FhOptions tight;
  tight.max_iter = 1;
  CHECK_THROWS_AS(fh_fit_ml(intercept_only(kInteriorY, design_D(10)), tight), FitError);
}

TEST_CASE("bayes rule: hand-evaluated cases") {
  const GaussianArea a{"a", 2.0, 1.0, {1.0}};
  CHECK(fh_bayes(a, {{0.0}, 1.0}) == 1.0);
  CHECK(fh_bayes(a, {{0.5}, 0.0}) == 0.5);
  const GaussianArea fixed{"b", 0.7, 2.0, {1.0}};
  for (double A : {0.0, 0.1, 5.0, 1e6}) CHECK(fh_bayes(fixed, {{0.7}, A}) == doctest::Approx(0.7));
}

TEST_CASE("bayes rule: shrinkage bound and monotonicity on random inputs") {
  auto rng = make_stream(99);
  std::uniform_real_distribution<double> u(-5.0, 5.0), pos(0.01, 5.0);
  for (int k = 0; k < 2000; ++k) {
    const double y = u(rng), mean = u(rng), D = pos(rng), A = pos(rng);
    const GaussianArea a{"a", y, D, {1.0}};
    const double est = fh_bayes(a, {{mean}, A});
    CHECK(std::abs(est - mean) <= std::abs(y - mean) + 1e-15);
    CHECK(std::min(y, mean) - 1e-12 <= est);
    CHECK(est <= std::max(y, mean) + 1e-12);
    // nondecreasing in y
    const GaussianArea higher{"a", y + 0.5, D, {1.0}};
    CHECK(fh_bayes(higher, {{mean}, A}) >= est);
    // moves toward y as A grows
    const double more = fh_bayes(a, {{mean}, A * 2.0});
    CHECK(std::abs(more - y) <= std::abs(est - y) + 1e-12);
  }
}

TEST_CASE("EB: composition and convexity on the corn data") {
  const auto corn = corn_dataset();
  const auto fit = fh_fit_ml(corn);
  const auto eb = fh_eb(corn);
  REQUIRE(eb.size() == corn.size());
  for (std::size_t i = 0; i < corn.size(); ++i) {
    CHECK(eb[i] == fh_bayes(corn[i], fit.params));
    const double mean = fit.params.beta[0];
    CHECK(std::min(corn[i].y, mean) <= eb[i]);
    CHECK(eb[i] <= std::max(corn[i].y, mean));
  }
  // Independent check of the corn fit against the grid oracle.
  std::vector<double> y, D;
  for (const auto& a : corn) {
    y.push_back(a.y);
    D.push_back(a.D);
  }
  const auto o = oracle::fh_ml(y, D, 100.0 * 2916.0);
  CHECK(std::abs(fit.neg2loglik - o.value) < 1e-6);
  CHECK(fit.params.A == doctest::Approx(o.v).epsilon(1e-3));
  CHECK(fit.params.beta[0] == doctest::Approx(o.u).epsilon(1e-6));
}
