#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "aalab/experiments/bundle.hpp"

using namespace aalab;
using nlohmann::json;

namespace {
json small_ou() {
  return {{"scenario", "ou-counterexample"},
          {"seed", 11},
          {"params",
           {{"covariance", {{"paths", 20000}, {"max_lag", 1.0}}},
            {"gap", {{"paths", 1000}, {"horizon", 30.0}, {"average_window", {0.0, 20.0}}}},
            {"path_curve", {{"shifts", {1.0, 2.0}}, {"atom_cap", 100}}}}}};
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("aalab_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}
}  // namespace

TEST_CASE("config defaults and round trip") {
  for (const auto& name : scenario_names()) {
    const auto c = ExperimentConfig::from_json({{"scenario", name}});
    CHECK(c.params == ExperimentConfig::defaults(name).params);
    const auto again = ExperimentConfig::from_json(c.to_json());
    CHECK(again.to_json() == c.to_json());
  }
  const auto c = ExperimentConfig::from_json({{"scenario", "remark-nonvector"},
                                              {"seed", 18446744073709551615ull},
                                              {"params", {{"onedim", {{"atom_cap", 50}}}}}});
  CHECK(c.seed == std::numeric_limits<std::uint64_t>::max());
  CHECK(c.params["onedim"]["atom_cap"] == 50);
  CHECK(c.params["onedim"]["refute_factor"] == 5.0);  // siblings keep their defaults
}

TEST_CASE("config rejects unknown keys, bad types and bad ranges") {
  auto bad = [](json j) { CHECK_THROWS_AS(ExperimentConfig::from_json(j), ConfigError); };
  bad({{"scenario", "nope"}});
  bad({{"scenario", "ou-counterexample"}, {"extra", 1}});
  bad({{"scenario", "ou-counterexample"}, {"params", {{"gap", {{"alhpa", 1.0}}}}}});
  bad({{"scenario", "ou-counterexample"}, {"params", {{"gap", {{"paths", -5}}}}}});
  bad({{"scenario", "ou-counterexample"}, {"params", {{"gap", {{"paths", 1.5}}}}}});
  bad({{"scenario", "ou-counterexample"}, {"params", {{"gap", {{"lags", "all"}}}}}});
  bad({{"scenario", "ou-counterexample"}, {"params", {{"gap", {{"lags", {0.55}}}}}}});
  bad({{"scenario", "ou-counterexample"}, {"params", {{"covariance", {{"cases", {{1.0, 1.0}}}}}}}});
  bad({{"scenario", "ou-counterexample"}, {"seed", -1}});
  bad({{"scenario", "remark-nonvector"}, {"params", {{"h", 0.0}}}});
  bad({{"scenario", "remark-nonvector"}, {"params", {{"times", {0.25}}}}});
  bad({{"scenario", "theorem-aa"}, {"params", {{"model", {{"f", {{{"op", "wobble"}}}}}}}}});
  bad({{"scenario", "theorem-aa"}, {"params", {{"simulation", {{"record_stride", 7}}}}}});
  // a large Lipschitz part pushes theta' past 1
  bad({{"scenario", "theorem-aa"},
       {"params", {{"model", {{"f", {{{"op", "mul"}, {"args", {2.0, {{"op", "x"}}}}}}}}}}}});
  bad({{"scenario", "theorem-main"}, {"params", {{"model", {{"f2", json::array()}}}}}});
  bad({{"scenario", "theorem-main"}, {"params", {{"probe", {{"steps", 500}}}}}});
  bad({{"scenario", "theorem-main"}, {"params", {{"check", {{"radii", {25.0, 500.0}}}}}}});
  bad({{"scenario", "ou-counterexample"}, {"params", {{"path_curve", {{"shifts", {60.0}}}}}}});
  bad({{"scenario", "superposition"}, {"params", {{"curves", {{"base_time", -99.0}}}}}});
}

TEST_CASE("table csv round trip is exact") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  Table t({"a", "b", "c"});
  for (int i = 0; i < 200; ++i) t.add({u(rng), u(rng) * 1e-300, std::ldexp(u(rng), -40)});
  t.add({std::nan(""), std::numeric_limits<double>::infinity(), -0.0});
  const auto back = Table::from_csv(t.to_csv());
  REQUIRE(back.columns == t.columns);
  REQUIRE(back.rows.size() == t.rows.size());
  for (std::size_t i = 0; i + 1 < t.rows.size(); ++i) CHECK(back.rows[i] == t.rows[i]);
  CHECK(std::isnan(back.rows.back()[0]));
  CHECK(back.rows.back()[1] == std::numeric_limits<double>::infinity());
  CHECK(back.to_csv() == t.to_csv());
  CHECK_THROWS_AS(t.add({1.0}), ShapeMismatch);
  CHECK_THROWS_AS(Table::from_csv("x\n1.5abc\n"), ConfigError);
}

TEST_CASE("ou counterexample bundle and judge") {
  const auto cfg = ExperimentConfig::from_json(small_ou());
  const auto b = run_experiment(cfg);
  for (const auto& c : b.checks) {
    INFO(c.name << " " << c.value << " " << c.relation << " " << c.threshold);
    CHECK(c.pass);
  }
  // covariance at lag 0 estimates sigma^2
  const auto cov = b.tables().at("covariance");
  CHECK(cov.rows[0][cov.index("estimate")] == Catch::Approx(1.0).margin(4.0 * cov.rows[0][cov.index("se")]));

  const auto dir = scratch("ou");
  write_bundle(b, dir.string());
  for (const char* f : {"config.json", "verdicts.json", "covariance.csv", "gap.csv", "path_curve.csv"})
    CHECK(std::filesystem::exists(dir / f));
  auto rep = judge_bundle(dir.string());
  CHECK(rep.agrees);
  CHECK(rep.all_pass());

  // tampering with an emitted table changes the re-derived verdict
  auto tables = b.tables();
  auto& gap = tables.at("gap");
  gap.rows[0][gap.index("estimate")] *= 1.5;
  std::ofstream(dir / "gap.csv") << gap.to_csv();
  rep = judge_bundle(dir.string());
  CHECK_FALSE(rep.agrees);
  CHECK_FALSE(rep.all_pass());
  std::filesystem::remove_all(dir);
}

TEST_CASE("bundles are identical across thread counts and reruns") {
  json j = small_ou();
  j["params"]["covariance"]["paths"] = 3000;
  j["params"]["path_curve"]["shifts"] = {1.0};
  j["threads"] = 1;
  const auto one = run_experiment(ExperimentConfig::from_json(j));
  j["threads"] = 3;
  const auto three = run_experiment(ExperimentConfig::from_json(j));
  CHECK(one.csv == three.csv);
  j["seed"] = 12;
  const auto other = run_experiment(ExperimentConfig::from_json(j));
  CHECK(other.csv.at("gap") != one.csv.at("gap"));
  parallel::set_threads(0);
}

TEST_CASE("remark scenario refutes the sum") {
  const auto cfg = ExperimentConfig::from_json(
      {{"scenario", "remark-nonvector"},
       {"seed", 3},
       {"params", {{"paths", 40000}, {"onedim", {{"atom_cap", 5000}, {"shifts", {20.0}}}}}}});
  const auto b = run_experiment(cfg);
  for (const auto& c : b.checks) {
    INFO(c.name << " " << c.value);
    CHECK(c.pass);
  }
  const auto var = b.tables().at("variance");
  CHECK(var.rows.size() == 41);
  CHECK(var.column("exact").front() == 4.0);
}

TEST_CASE("theorem scenarios produce their tables at small scale") {
  const json sim{{"steps", 2000}, {"paths", 200}, {"record_stride", 10}};
  const auto aa = run_experiment(ExperimentConfig::from_json(
      {{"scenario", "theorem-aa"},
       {"params",
        {{"simulation", sim},
         {"contraction", {{"steps", 200}, {"paths", 50}, {"iterations", 6}}},
         {"curves", {{"shifts", {12.6}}, {"atom_cap", 50}}}}}}));
  for (const char* t : {"constants", "contraction", "onedim", "path", "ui"}) CHECK(aa.csv.count(t) == 1);
  CHECK(aa.checks.size() == 5);
  CHECK(aa.checks[0].pass);  // theta' < 1
  CHECK(aa.checks[1].pass);  // contraction

  json main_sim = sim;
  main_sim["t0"] = -20.0;
  const auto m = run_experiment(ExperimentConfig::from_json(
      {{"scenario", "theorem-main"},
       {"params",
        {{"simulation", main_sim},
         {"check", {{"radii", {5.0, 10.0, 20.0}}, {"base_time", -10.0}, {"shifts", {12.6}}, {"atom_cap", 50}}},
         {"probe", {{"paths", 50}, {"shifts", {0.0, 30.0}}}}}}}));
  for (const char* t : {"constants", "z_moment", "ergodic", "y_onedim", "y_path", "y_ui", "probe"}) CHECK(m.csv.count(t) == 1);
  const auto erg = m.tables().at("ergodic").column("value");
  CHECK(erg.back() < erg.front());
  const auto probe = m.tables().at("probe");
  CHECK(probe.column("d_bl").back() < probe.column("d_bl").front());
  CHECK(probe.column("coefficient_gap").front() == Catch::Approx(0.15));
}

TEST_CASE("superposition scenario") {
  const auto b = run_experiment(ExperimentConfig::from_json(
      {{"scenario", "superposition"},
       {"params", {{"ou", {{"paths", 400}}}, {"curves", {{"shifts", {31.4}}, {"atom_cap", 150}}}}}}));
  for (const auto& c : b.checks) {
    INFO(c.name << " " << c.value);
    CHECK(c.pass);
  }
  // H = ERG1(t) cos(Y(t)) with Y ~ N(0, 1): E cos^2 Y = (1 + e^{-2}) / 2
  const auto h = b.tables().at("h_moment");
  const auto row = h.rows[detail::find_row(h, "t", 0.0)];
  CHECK(row[1] == Catch::Approx(std::sqrt((1.0 + std::exp(-2.0)) / 2.0)).epsilon(0.05));
}
