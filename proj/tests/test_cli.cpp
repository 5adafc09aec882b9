#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bagged_eb/corn.hpp"
#include "cli.hpp"

namespace fs = std::filesystem;
using beb::cli::run;

namespace {

fs::path tmp_dir(const std::string& name) {
  const fs::path p = fs::path(BEB_TEST_TMP) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

struct Run {
  int code;
  std::string out, err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "bagged-eb");
  std::ostringstream o, e;
  const int code = run(args, o, e);
  return {code, o.str(), e.str()};
}

std::vector<std::vector<std::string>> read_rows(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    rows.push_back(f);
  }
  return rows;
}

}  // namespace

TEST_CASE("fit on the embedded corn data") {
  const auto dir = tmp_dir("fit_corn");
  const auto r = invoke({"fit", "--embedded", "corn", "--out", dir.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("A      =") != std::string::npos);
  const auto j = nlohmann::json::parse(slurp(dir / "fit.json"));
  CHECK(j["beta"].size() == 1);
  CHECK(j["A"].get<double>() > 0.0);
  CHECK(fs::exists(dir / "manifest.json"));
}

TEST_CASE("input errors exit with code 2") {
  const auto dir = tmp_dir("bad_input");
  spit(dir / "bad.csv", "id,y,D\na,1.0,0.5\nb,oops,0.5\nc,2.0,0.5\n");
  auto r = invoke({"fit", "--data", (dir / "bad.csv").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("line 3") != std::string::npos);

  spit(dir / "gauss.csv", "id,y,D\na,1.0,0.5\nb,2.0,0.5\nc,2.0,0.5\n");
  r = invoke({"fit", "--model", "pg", "--data", (dir / "gauss.csv").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("schema") != std::string::npos);

  spit(dir / "counts.csv", "id,z,n\na,1,5\nb,2,5\nc,0,5\n");
  r = invoke({"fit", "--model", "fh", "--data", (dir / "counts.csv").string()});
  CHECK(r.code == 2);

  r = invoke({"fit", "--model", "xx", "--embedded", "corn"});
  CHECK(r.code == 2);
  r = invoke({"fit", "--data", (dir / "missing.csv").string()});
  CHECK(r.code == 2);
}

TEST_CASE("numerical failures exit with code 3") {
  const auto dir = tmp_dir("all_zero");
  spit(dir / "zeros.csv", "id,z,n\na,0,5\nb,0,7\nc,0,9\n");
  const auto r = invoke({"fit", "--model", "pg", "--data", (dir / "zeros.csv").string()});
  CHECK(r.code == 3);
}

TEST_CASE("estimate: identity scheme with B = 1 reproduces EB") {
  const auto dir = tmp_dir("est_identity");
  const auto r = invoke({"estimate", "--embedded", "corn", "-B", "1", "--scheme", "identity",
                         "--seed", "3", "--out", dir.string()});
  REQUIRE(r.code == 0);
  const auto rows = read_rows(dir / "estimates.csv");
  REQUIRE(rows.size() == 9);
  CHECK(rows[0] == std::vector<std::string>{"id", "direct", "eb", "beb", "sd", "jensen_gap",
                                            "pct_rel_diff"});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][2] == rows[i][3]);
    CHECK(std::stod(rows[i][5]) == 0.0);
  }
}

TEST_CASE("estimate: largest PG relative differences fall in small-exposure areas") {
  const auto dir = tmp_dir("est_pg");
  std::ostringstream csv;
  csv << "id,z,n\n";
  const int z[] = {0, 1, 0, 3, 2, 6, 9, 12, 20, 31, 44, 60};
  const int n[] = {2, 3, 4, 5, 6, 10, 15, 20, 35, 50, 70, 100};
  for (int i = 0; i < 12; ++i) csv << "a" << i << ',' << z[i] << ',' << n[i] << '\n';
  spit(dir / "counts.csv", csv.str());
  const auto r = invoke({"estimate", "--model", "pg", "--data", (dir / "counts.csv").string(),
                         "-B", "200", "--seed", "11", "--out", dir.string()});
  REQUIRE(r.code == 0);
  const auto rows = read_rows(dir / "estimates.csv");
  REQUIRE(rows.size() == 13);
  std::size_t arg = 0;
  double best = -1.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i][6].empty()) continue;
    const double v = std::abs(std::stod(rows[i][6]));
    if (v > best) {
      best = v;
      arg = i - 1;
    }
  }
  CHECK(best > 0.0);
  CHECK(arg < 6);
}

TEST_CASE("diagnose: one row per replicate, histogram counts sum to B") {
  const auto dir = tmp_dir("diag");
  const auto r = invoke({"diagnose", "--embedded", "corn", "-B", "2", "--seed", "4", "--bins",
                         "5", "--out", dir.string()});
  REQUIRE(r.code == 0);
  const auto rows = read_rows(dir / "bootstrap_params.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"replicate", "beta_0", "A"});
  const auto svg = slurp(dir / "histograms.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  const auto d = nlohmann::json::parse(slurp(dir / "diagnostics.json"));
  CHECK(d["n_used"].get<int>() == 2);
  const double bf = d["boundary_fraction"].get<double>();
  CHECK((bf == 0.0 || bf == 0.5 || bf == 1.0));
}

TEST_CASE("simulate: same seed gives identical bytes; replay matches") {
  const auto dir = tmp_dir("sim");
  spit(dir / "sim.cfg",
       "# tiny study\nmodel = fh\nm_grid = 6, 8\nhyper_grid = 0.3\nR = 4\nB_grid = 2, 3\nseed = 21\n");
  const auto a = dir / "a";
  const auto b = dir / "b";
  REQUIRE(invoke({"simulate", "--config", (dir / "sim.cfg").string(), "--out", a.string()}).code == 0);
  REQUIRE(invoke({"simulate", "--config", (dir / "sim.cfg").string(), "--out", b.string()}).code == 0);
  CHECK(slurp(a / "simulation.csv") == slurp(b / "simulation.csv"));
  CHECK(read_rows(a / "simulation.csv").size() == 1 + 2 * 3);

  const auto c = dir / "c";
  REQUIRE(invoke({"replay", (a / "manifest.json").string(), "--out", c.string()}).code == 0);
  CHECK(slurp(a / "simulation.csv") == slurp(c / "simulation.csv"));
  CHECK(slurp(a / "mse.svg") == slurp(c / "mse.svg"));

  spit(dir / "bad.cfg", "nonsense = 3\n");
  CHECK(invoke({"simulate", "--config", (dir / "bad.cfg").string()}).code == 2);
}

TEST_CASE("a missing seed is generated, recorded and replayable") {
  const auto dir = tmp_dir("noseed");
  const auto a = dir / "a";
  REQUIRE(invoke({"estimate", "--embedded", "corn", "-B", "20", "--out", a.string()}).code == 0);
  const auto man = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(man.dump().find("seed") != std::string::npos);
  const auto b = dir / "b";
  REQUIRE(invoke({"replay", (a / "manifest.json").string(), "--out", b.string()}).code == 0);
  CHECK(slurp(a / "estimates.csv") == slurp(b / "estimates.csv"));
  CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
  CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
}

TEST_CASE("corn round-trips through the CSV reader") {
  const auto dir = tmp_dir("corn_rt");
  std::ostringstream csv;
  beb::write_csv(csv, beb::corn_dataset());
  spit(dir / "corn.csv", csv.str());
  const auto e = dir / "e";
  const auto f = dir / "f";
  REQUIRE(invoke({"estimate", "--embedded", "corn", "-B", "30", "--seed", "8", "--out", e.string()}).code == 0);
  REQUIRE(invoke({"estimate", "--data", (dir / "corn.csv").string(), "-B", "30", "--seed", "8",
                  "--out", f.string()})
              .code == 0);
  CHECK(slurp(e / "estimates.csv") == slurp(f / "estimates.csv"));
}
