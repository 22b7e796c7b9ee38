#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aalab/experiments/config.hpp"
#include "aalab/experiments/scenarios.hpp"

namespace aalab {

/// Resolved config, the emitted tables (CSV text) and the verdicts derived
/// from that text.
struct Bundle {
  ExperimentConfig config;
  std::map<std::string, std::string> csv;
  std::vector<Check> checks;

  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }

  nlohmann::json verdicts_json() const {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& c : checks) list.push_back(c.to_json());
    return {{"scenario", config.scenario}, {"seed", config.seed}, {"all_pass", all_pass()}, {"checks", list}};
  }

  TableSet tables() const {
    TableSet t;
    for (const auto& [name, text] : csv) t[name] = Table::from_csv(text);
    return t;
  }
};

inline Bundle run_experiment(const ExperimentConfig& cfg) {
  Bundle b;
  b.config = cfg;
  for (const auto& [name, table] : run_scenario_tables(cfg)) b.csv[name] = table.to_csv();
  // verdicts come from the parsed CSV text, never from in-memory results
  b.checks = judge(cfg, b.tables());
  return b;
}

/// dir/config.json, dir/<table>.csv, dir/verdicts.json
inline void write_bundle(const Bundle& b, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& text) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + (fs::path(dir) / name).string());
    out << text;
  };
  put("config.json", b.config.to_json().dump(2) + "\n");
  for (const auto& [name, text] : b.csv) put(name + ".csv", text);
  put("verdicts.json", b.verdicts_json().dump(2) + "\n");
}

struct JudgeReport {
  std::vector<Check> checks;
  bool agrees = false;  // recorded verdicts match the re-derived ones
  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
};

/// Re-derives the verdicts of a written bundle from its config and CSV files.
inline JudgeReport judge_bundle(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream cin(fs::path(dir) / "config.json");
  if (!cin) throw ConfigError("bundle " + dir + " has no config.json");
  const auto cfg = ExperimentConfig::from_json(nlohmann::json::parse(cin));
  TableSet tables;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".csv") tables[entry.path().stem().string()] = Table::read(entry.path().string());
  JudgeReport rep;
  rep.checks = judge(cfg, tables);
  std::ifstream vin(fs::path(dir) / "verdicts.json");
  if (!vin) throw ConfigError("bundle " + dir + " has no verdicts.json");
  const auto recorded = nlohmann::json::parse(vin).at("checks");
  rep.agrees = recorded.size() == rep.checks.size();
  for (std::size_t i = 0; rep.agrees && i < rep.checks.size(); ++i)
    rep.agrees = recorded[i].at("name") == rep.checks[i].name && recorded[i].at("pass") == rep.checks[i].pass;
  return rep;
}

}  // namespace aalab
