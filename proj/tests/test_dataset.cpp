#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bagged_eb/corn.hpp"
#include "bagged_eb/dataset.hpp"

using namespace beb;

TEST_CASE("corn fixture carries the reference direct estimates and standard deviations") {
  const auto corn = corn_dataset();
  REQUIRE(corn.size() == 8);
  CHECK(corn[0].id == "Franklin");
  CHECK(corn[0].y == 158.62);
  CHECK(std::sqrt(corn[0].D) == 5.70);
  CHECK(corn[7].id == "Hardin");
  CHECK(corn[7].y == 120.05);
  CHECK(std::sqrt(corn[7].D) == 36.81);
  for (std::size_t i = 0; i < corn.size(); ++i) {
    CHECK(corn[i].y == kCornTable[i].direct);
    CHECK(std::sqrt(corn[i].D) == kCornTable[i].sd);
    CHECK(corn[i].x == std::vector<double>{1.0});
  }
}

TEST_CASE("corn fixture round-trips through CSV") {
  const auto corn = corn_dataset();
  std::stringstream ss;
  write_csv(ss, corn);
  const auto back = read_gaussian_csv(ss);
  CHECK(back == corn);
  std::stringstream again;
  write_csv(again, back);
  std::stringstream first;
  write_csv(first, corn);
  CHECK(again.str() == first.str());
}

TEST_CASE("gaussian CSV prepends the intercept and keeps covariate names") {
  std::istringstream in("id,y,D,sat\na,1.5,0.25,3\nb,2,0.5,4.5\n\nc,-1,1,0\n");
  std::vector<std::string> names;
  const auto d = read_gaussian_csv(in, &names);
  REQUIRE(d.size() == 3);
  CHECK(d.dim() == 2);
  CHECK(d[1].x == std::vector<double>{1.0, 4.5});
  CHECK(names == std::vector<std::string>{"sat"});
}

TEST_CASE("count CSV in the lip-cancer layout loads") {
  std::istringstream in("id,z,n,AFF\n1,9,1.4,0.16\n2,39,8.7,0.16\n3,0,5.6,0.1\n");
  const auto d = read_count_csv(in);
  REQUIRE(d.size() == 3);
  CHECK(d[1].z == 39);
  CHECK(d[2].n == 5.6);
  CHECK(d[0].x == std::vector<double>{1.0, 0.16});
}

TEST_CASE("CSV errors name the offending line") {
  SUBCASE("non-numeric field") {
    std::istringstream in("id,y,D\na,1,1\nb,oops,1\n");
    try {
      read_gaussian_csv(in);
      FAIL("expected InputError");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
  SUBCASE("wrong field count") {
    std::istringstream in("id,y,D\na,1,1\nb,2\n");
    CHECK_THROWS_WITH_AS(read_gaussian_csv(in), doctest::Contains("line 3"), InputError);
  }
  SUBCASE("nonpositive variance") {
    std::istringstream in("id,y,D\na,1,1\nb,2,0\n");
    CHECK_THROWS_WITH_AS(read_gaussian_csv(in), doctest::Contains("line 3"), InputError);
  }
  SUBCASE("fractional count") {
    std::istringstream in("id,z,n\na,1,1\nb,2.5,3\n");
    CHECK_THROWS_WITH_AS(read_count_csv(in), doctest::Contains("line 3"), InputError);
  }
  SUBCASE("negative count") {
    std::istringstream in("id,z,n\na,-1,1\nb,2,3\n");
    CHECK_THROWS_AS(read_count_csv(in), InputError);
  }
  SUBCASE("header of the other model") {
    std::istringstream in("id,z,n\na,1,1\nb,2,3\n");
    CHECK_THROWS_AS(read_gaussian_csv(in), InputError);
  }
}

TEST_CASE("dataset invariants") {
  CHECK_THROWS_AS(GaussianDataset({{"a", 0.0, 1.0, {1.0}}}), InputError);
  CHECK_THROWS_AS(GaussianDataset({{"a", 0.0, 1.0, {1.0}}, {"a", 1.0, 1.0, {1.0}}}), InputError);
  CHECK_NOTHROW(GaussianDataset({{"a", 0.0, 1.0, {1.0}}, {"a", 1.0, 1.0, {1.0}}},
                                IdPolicy::AllowDuplicates));
  CHECK_THROWS_AS(GaussianDataset({{"a", 0.0, 1.0, {1.0}}, {"b", 1.0, 1.0, {1.0, 2.0}}}),
                  InputError);
  CHECK_THROWS_AS(CountDataset({{"a", 1, 0.0, {1.0}}, {"b", 1, 1.0, {1.0}}}), InputError);
}

TEST_CASE("detect_kind reads the header") {
  std::istringstream g("id,y,D,x\n"), c("\nid,z,n\n"), bad("name,value\n");
  CHECK(detect_kind(g) == DatasetKind::Gaussian);
  CHECK(detect_kind(c) == DatasetKind::Count);
  CHECK_THROWS_AS(detect_kind(bad), InputError);
}
