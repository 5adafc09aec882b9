#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "bagged_eb/corn.hpp"
#include "bagged_eb/resample.hpp"
#include "bagged_eb/simulation.hpp"

using namespace beb;

namespace {

struct StuckAtZero {
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return 0; }
};

CountDataset small_counts() {
  return CountDataset({{"a", 3, 10.0, {1.0, 0.5}},
                       {"b", 0, 4.0, {1.0, -0.5}},
                       {"c", 12, 20.0, {1.0, 0.0}},
                       {"d", 7, 8.0, {1.0, 1.0}}});
}

}  // namespace

TEST_CASE("a generator stuck at zero draws area 0 every time") {
  StuckAtZero g;
  const auto corn = corn_dataset();
  const auto r = resample_nonparametric(corn, g);
  REQUIRE(r.size() == corn.size());
  for (const auto& a : r) CHECK(a == corn[0]);
}

TEST_CASE("uniform_index covers the range and rejects bias") {
  Stream rng(1);
  std::vector<int> counts(7, 0);
  for (int k = 0; k < 70000; ++k) ++counts[uniform_index(rng, 7)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("nonparametric resampling keeps whole tuples and is seed-deterministic") {
  const auto data = small_counts();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto r1 = make_stream(seed, {3});
    auto r2 = make_stream(seed, {3});
    const auto a = resample_nonparametric(data, r1);
    const auto b = resample_nonparametric(data, r2);
    CHECK(a == b);
    CHECK(a.size() == data.size());
    CHECK(a.dim() == data.dim());
    for (const auto& area : a)
      CHECK(std::find(data.begin(), data.end(), area) != data.end());
  }
}

TEST_CASE("distinct replicate paths give distinct streams") {
  const auto corn = corn_dataset();
  auto r0 = make_stream(42, {0, 0});
  auto r1 = make_stream(42, {1, 0});
  auto r2 = make_stream(42, {0, 1});
  const auto a = resample_nonparametric(corn, r0);
  const auto b = resample_nonparametric(corn, r1);
  const auto c = resample_nonparametric(corn, r2);
  CHECK_FALSE(a == b);
  CHECK_FALSE(a == c);
  CHECK(derive_seed(42, {0, 1}) != derive_seed(42, {1, 0}));
}

TEST_CASE("parametric FH resampling with A = 0 centres y on the regression mean") {
  const auto D = design_D(200);
  std::vector<GaussianArea> areas;
  for (std::size_t i = 0; i < D.size(); ++i)
    areas.push_back({std::to_string(i), 0.0, D[i], {1.0, static_cast<double>(i % 5)}});
  const GaussianDataset data(std::move(areas));
  const FhParams p{{2.0, -1.0}, 0.0};
  // y_i - x_i'beta ~ N(0, D_i) exactly when the prior is degenerate.
  double z2 = 0.0;
  std::size_t count = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    auto rng = make_stream(s);
    const auto r = resample_parametric(data, p, rng);
    for (std::size_t i = 0; i < r.size(); ++i) {
      CHECK(r[i].D == data[i].D);
      CHECK(r[i].x == data[i].x);
      const double e = r[i].y - linear_predictor(r[i].x, p.beta);
      z2 += e * e / r[i].D;
      ++count;
    }
  }
  // mean of chi-square(1) draws; sd of the mean is sqrt(2/count)
  CHECK(std::abs(z2 / static_cast<double>(count) - 1.0) < 4.0 * std::sqrt(2.0 / count));

  auto a = make_stream(9), b = make_stream(9);
  CHECK(resample_parametric(data, p, a) == resample_parametric(data, p, b));
}

TEST_CASE("parametric PG resampling reproduces the prior mean rate") {
  const auto data = small_counts();
  const PgParams p{{0.2, 0.4}, 15.0};
  const std::size_t reps = 20000;
  std::vector<double> sum(data.size(), 0.0), sumsq(data.size(), 0.0);
  for (std::size_t k = 0; k < reps; ++k) {
    auto rng = make_stream(77, {k});
    const auto r = resample_parametric(data, p, rng);
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double rate = static_cast<double>(r[i].z) / r[i].n;
      sum[i] += rate;
      sumsq[i] += rate * rate;
    }
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double mean = sum[i] / reps;
    const double var = sumsq[i] / reps - mean * mean;
    const double target = std::exp(linear_predictor(data[i].x, p.beta));
    CHECK(std::abs(mean - target) < 4.0 * std::sqrt(var / reps));
  }
}

TEST_CASE("parametric resampling rejects invalid hyperparameters") {
  auto rng = make_stream(1);
  CHECK_THROWS_AS(resample_parametric(corn_dataset(), FhParams{{0.0}, -1.0}, rng), InputError);
  CHECK_THROWS_AS(resample_parametric(small_counts(), PgParams{{0.0, 0.0}, 0.0}, rng), InputError);
  CHECK_THROWS_AS(resample_parametric(small_counts(), PgParams{{0.0}, 1.0}, rng), InputError);
}
