#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "bagged_eb/bagging.hpp"
#include "bagged_eb/simulation.hpp"

namespace beb::cli {

inline constexpr const char* kToolName = "bagged-eb";
inline constexpr const char* kToolVersion = "1.0.0";

/// Where the data came from: a CSV path (stored absolute) or an embedded name.
struct DataSource {
  std::optional<std::filesystem::path> path;
  std::optional<std::string> embedded;
};

/// Everything needed to rerun one command bit-exactly. Thread counts are not
/// recorded; results never depend on them.
struct RunManifest {
  std::string command;  // fit | estimate | diagnose | simulate
  ModelKind model = ModelKind::FH;
  DataSource data;
  BootstrapSpec bootstrap;
  std::size_t bins = 30;
  std::optional<SimConfig> sim;
};

nlohmann::ordered_json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

RunManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& dir, const RunManifest& m);

/// Flat `key = value` simulation config; `#` starts a comment. Keys: model,
/// scale (reduced|full), m_grid, hyper_grid, mu, R, B_grid, seed, scheme,
/// max_retries. Unset keys keep the defaults of the chosen model and scale.
/// `seed_set` reports whether the file provided a seed.
SimConfig parse_sim_config(std::istream& in, std::optional<ModelKind> model_override,
                           bool full_scale, bool* seed_set = nullptr);

}  // namespace beb::cli
