#include "manifest.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace beb::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json sim_to_json(const SimConfig& c) {
  ordered_json j;
  j["model"] = std::string(to_string(c.model));
  j["m_grid"] = c.m_grid;
  j["hyper_grid"] = c.hyper_grid;
  j["mu"] = c.mu;
  j["R"] = c.R;
  j["B_grid"] = c.B_grid;
  j["seed"] = c.seed;
  j["scheme"] = std::string(to_string(c.scheme));
  j["max_retries"] = c.max_retries;
  return j;
}

SimConfig sim_from_json(const json& j) {
  SimConfig c;
  c.model = parse_model(j.at("model").get<std::string>());
  c.m_grid = j.at("m_grid").get<std::vector<std::size_t>>();
  c.hyper_grid = j.at("hyper_grid").get<std::vector<double>>();
  c.mu = j.at("mu").get<double>();
  c.R = j.at("R").get<std::size_t>();
  c.B_grid = j.at("B_grid").get<std::vector<std::size_t>>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.scheme = parse_scheme(j.at("scheme").get<std::string>());
  c.max_retries = j.at("max_retries").get<std::size_t>();
  return c;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

template <class T>
T parse_number(const std::string& text, const std::string& key, std::size_t line) {
  T v{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty())
    throw InputError("config line " + std::to_string(line) + ": bad value '" + text +
                     "' for key '" + key + "'");
  return v;
}

template <class T>
std::vector<T> parse_list(const std::string& text, const std::string& key, std::size_t line) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<T>(trim(item), key, line));
  if (out.empty())
    throw InputError("config line " + std::to_string(line) + ": empty list for '" + key + "'");
  return out;
}

}  // namespace

ordered_json to_json(const RunManifest& m) {
  ordered_json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["command"] = m.command;
  j["model"] = std::string(to_string(m.model));
  if (m.command != "simulate") {
    ordered_json d;
    if (m.data.path) d["path"] = m.data.path->string();
    if (m.data.embedded) d["embedded"] = *m.data.embedded;
    j["dataset"] = d;
  }
  if (m.command == "estimate" || m.command == "diagnose") {
    j["bootstrap"] = {{"B", m.bootstrap.B},
                      {"scheme", std::string(to_string(m.bootstrap.scheme))},
                      {"seed", m.bootstrap.seed},
                      {"max_retries", m.bootstrap.max_retries}};
    j["seed"] = m.bootstrap.seed;
  }
  if (m.command == "diagnose") j["bins"] = m.bins;
  if (m.sim) {
    j["config"] = sim_to_json(*m.sim);
    j["seed"] = m.sim->seed;
  }
  return j;
}

RunManifest manifest_from_json(const json& j) {
  try {
    if (j.value("tool", std::string()) != kToolName)
      throw InputError("manifest was not written by " + std::string(kToolName));
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.model = parse_model(j.at("model").get<std::string>());
    if (j.contains("dataset")) {
      const auto& d = j.at("dataset");
      if (d.contains("path")) m.data.path = d.at("path").get<std::string>();
      if (d.contains("embedded")) m.data.embedded = d.at("embedded").get<std::string>();
    }
    if (j.contains("bootstrap")) {
      const auto& b = j.at("bootstrap");
      m.bootstrap.B = b.at("B").get<std::size_t>();
      m.bootstrap.scheme = parse_scheme(b.at("scheme").get<std::string>());
      m.bootstrap.seed = b.at("seed").get<std::uint64_t>();
      m.bootstrap.max_retries = b.at("max_retries").get<std::size_t>();
    }
    if (j.contains("bins")) m.bins = j.at("bins").get<std::size_t>();
    if (j.contains("config")) m.sim = sim_from_json(j.at("config"));
    return m;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed manifest: ") + e.what());
  }
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open manifest '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError("manifest '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return manifest_from_json(j);
}

void write_manifest(const std::filesystem::path& dir, const RunManifest& m) {
  std::ofstream out(dir / "manifest.json");
  out << to_json(m).dump(2) << '\n';
}

SimConfig parse_sim_config(std::istream& in, std::optional<ModelKind> model_override,
                           bool full_scale, bool* seed_set) {
  std::map<std::string, std::pair<std::string, std::size_t>> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InputError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    kv[trim(line.substr(0, eq))] = {trim(line.substr(eq + 1)), line_no};
  }

  ModelKind model = ModelKind::FH;
  if (auto it = kv.find("model"); it != kv.end()) model = parse_model(it->second.first);
  if (model_override) model = *model_override;
  if (auto it = kv.find("scale"); it != kv.end()) {
    if (it->second.first == "full")
      full_scale = true;
    else if (it->second.first != "reduced")
      throw InputError("config line " + std::to_string(it->second.second) +
                       ": scale must be 'reduced' or 'full'");
  }
  SimConfig c = default_config(model, full_scale);
  if (seed_set) *seed_set = false;
  for (const auto& [key, entry] : kv) {
    const auto& [value, ln] = entry;
    if (key == "model" || key == "scale") continue;
    if (key == "m_grid")
      c.m_grid = parse_list<std::size_t>(value, key, ln);
    else if (key == "hyper_grid")
      c.hyper_grid = parse_list<double>(value, key, ln);
    else if (key == "mu")
      c.mu = parse_number<double>(value, key, ln);
    else if (key == "R")
      c.R = parse_number<std::size_t>(value, key, ln);
    else if (key == "B_grid")
      c.B_grid = parse_list<std::size_t>(value, key, ln);
    else if (key == "seed") {
      c.seed = parse_number<std::uint64_t>(value, key, ln);
      if (seed_set) *seed_set = true;
    } else if (key == "scheme")
      c.scheme = parse_scheme(value);
    else if (key == "max_retries")
      c.max_retries = parse_number<std::size_t>(value, key, ln);
    else
      throw InputError("config line " + std::to_string(ln) + ": unknown key '" + key + "'");
  }
  validate(c);
  return c;
}

}  // namespace beb::cli
