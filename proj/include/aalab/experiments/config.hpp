#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "aalab/core/error.hpp"
#include "aalab/core/expr.hpp"
#include "aalab/sde/model.hpp"

namespace aalab {

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"ou-counterexample", "remark-nonvector", "theorem-aa", "theorem-main",
                                              "superposition"};
  return names;
}

namespace detail {

using nlohmann::json;

// Keys whose values are lists of coefficient expressions.
inline bool is_expression_key(const std::string& key) {
  static const std::set<std::string> keys{"f", "g", "f1", "f2", "g1", "g2"};
  return keys.count(key) > 0;
}

inline json tanh_x(double gain) {
  return {{"op", "mul"}, {"args", {gain, {{"op", "tanh"}, {"arg", {{"op", "x"}}}}}}};
}

inline json default_params(const std::string& scenario) {
  if (scenario == "ou-counterexample")
    return {{"covariance", {{"cases", {{1.0, 1.0, 0.5}, {0.5, 2.0, 1.0}}}, {"paths", 100000u}, {"h", 0.05}, {"max_lag", 4.0}}},
            {"gap",
             {{"alpha", 1.0}, {"sigma", 1.0}, {"paths", 10000u}, {"h", 0.1}, {"horizon", 60.0}, {"lags", {0.5, 1.0, 2.0, 5.0}},
              {"average_window", {0.0, 30.0}}}},
            {"path_curve",
             {{"base_time", 5.0},
              {"shifts", {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0, 13.0, 14.0, 15.0, 16.0, 17.0, 18.0, 19.0, 20.0}},
              {"k_max", 3},
              {"step", 0.1},
              {"atom_cap", 500u}}},
            {"tolerance", {{"se_multiple", 3.0}, {"gap_relative", 0.05}, {"flat_factor", 2.0}}}};
  if (scenario == "remark-nonvector")
    return {{"alpha", 1.0},
            {"sigma", 1.0},
            {"paths", 100000u},
            {"h", 0.5},
            {"horizon", 20.0},
            {"times", {0.0, 1.0, 5.0, 20.0}},
            {"onedim", {{"base_time", 0.0}, {"shifts", {1.0, 2.0, 5.0, 10.0, 20.0}}, {"atom_cap", 10000u}, {"refute_factor", 5.0}}},
            {"tolerance", {{"se_multiple", 3.0}}}};
  const json simulation{{"t0", 0.0}, {"h", 0.02}, {"steps", 23000u}, {"record_stride", 10u}, {"paths", 2000u}, {"burn_in", 5.0}};
  const json ap2{{"catalog", "AP2"}, {"scale", 0.05}};
  if (scenario == "theorem-aa")
    return {{"model",
             {{"decays", {2.0}},
              {"noise_variances", {1.0}},
              {"f", {{{"op", "add"}, {"args", {ap2, {{"catalog", "LEVITAN"}, {"scale", 0.05}}, tanh_x(0.2)}}}}},
              {"g", {{{"op", "add"}, {"args", {0.1, tanh_x(0.05)}}}}}}},
            {"simulation", simulation},
            {"contraction", {{"t0", 0.0}, {"steps", 1000u}, {"paths", 1000u}, {"iterations", 8u}, {"slack", 0.2}}},
            {"curves",
             {{"base_time", 10.0}, {"shifts", {75.4, 182.2, 439.8}}, {"k_max", 3}, {"step", 0.2}, {"atom_cap", 500u},
              {"flat_factor", 2.0}}},
            {"ui", {{"cutoffs", {0.0, 0.1, 0.2, 0.4}}, {"time_stride", 10u}, {"tail_fraction", 0.01}}}};
  if (scenario == "theorem-main") {
    json sim = simulation;
    sim["t0"] = -400.0;
    sim["steps"] = 40000u;
    return {{"model",
             {{"decays", {2.0}},
              {"noise_variances", {1.0}},
              {"f1", {{{"op", "add"}, {"args", {ap2, tanh_x(0.2)}}}}},
              {"f2", {{{"catalog", "ERG1"}, {"scale", 0.15}}}},
              {"g1", {0.1}},
              {"g2", {{{"catalog", "ERG2"}, {"scale", 0.05}}}}}},
            {"simulation", sim},
            {"check",
             {{"p", 2.0}, {"radii", {25.0, 50.0, 100.0, 200.0, 400.0}}, {"base_time", -300.0}, {"shifts", {75.4, 182.2, 439.8}},
              {"k_max", 3}, {"step", 0.2}, {"atom_cap", 500u}, {"flat_factor", 2.0}, {"decay_threshold", 0.25},
              {"ui_cutoffs", {0.0, 0.1, 0.2, 0.4}}, {"ui_time_stride", 10u}, {"ui_tail_fraction", 0.01}}},
            {"probe",
             {{"shifts", {0.0, 2.0, 8.0, 32.0}}, {"t0", -10.0}, {"steps", 1000u}, {"paths", 1000u}, {"record_stride", 10u},
              {"base_time", 0.0}, {"decay_threshold", 0.25}}}};
  }
  if (scenario == "superposition")
    return {{"ou", {{"alpha", 1.0}, {"sigma", 1.0}, {"t0", -100.0}, {"h", 0.1}, {"steps", 3000u}, {"paths", 2000u}}},
            {"f1", {{{"op", "add"}, {"args", {{{"catalog", "AP2"}, {"scale", 0.5}}, tanh_x(1.0)}}}}},
            {"f2", {{{"op", "mul"}, {"args", {{{"catalog", "ERG1"}}, {{"op", "cos"}, {"arg", {{"op", "x"}}}}}}}}},
            {"curves",
             {{"base_time", -90.0}, {"shifts", {31.4, 75.4, 182.2}}, {"k_max", 3}, {"step", 0.1}, {"atom_cap", 500u},
              {"flat_factor", 2.0}}},
            {"ergodic", {{"radii", {10.0, 25.0, 50.0, 100.0}}, {"decay_threshold", 0.25}}}};
  throw ConfigError("unknown scenario '" + scenario + "'");
}

inline const char* type_name(const json& j) {
  if (j.is_number_unsigned()) return "nonnegative integer";
  if (j.is_number_integer()) return "integer";
  if (j.is_number()) return "number";
  return j.type_name();
}

// Nonnegative integer, whether parsed as signed or unsigned.
inline bool is_count(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

inline void check_value(const json& def, const json& val, const std::string& path) {
  auto fail = [&] { throw ConfigError(path + ": expected " + type_name(def) + ", got " + type_name(val)); };
  if (def.is_object()) {
    if (!val.is_object()) fail();
    for (const auto& [k, v] : val.items()) {
      if (!def.contains(k)) throw ConfigError("unknown key '" + path + "." + k + "'");
      if (is_expression_key(k)) {
        if (!v.is_array() || v.empty()) throw ConfigError(path + "." + k + ": expected a non-empty list of expressions");
        for (const auto& e : v) (void)Expr::from_json(e);
      } else {
        check_value(def.at(k), v, path + "." + k);
      }
    }
  } else if (def.is_array()) {
    if (!val.is_array()) fail();
    if (!def.empty())
      for (std::size_t i = 0; i < val.size(); ++i) check_value(def.front(), val[i], path + "[" + std::to_string(i) + "]");
  } else if (def.is_number_unsigned()) {
    if (!is_count(val)) fail();
  } else if (def.is_number_integer()) {
    if (!val.is_number_integer()) fail();
  } else if (def.is_number()) {
    if (!val.is_number() || !std::isfinite(val.get<double>())) fail();
  } else if (def.type() != val.type()) {
    fail();
  }
}

inline void merge_into(json& base, const json& over) {
  for (const auto& [k, v] : over.items()) {
    if (v.is_object() && base.contains(k) && base[k].is_object() && !is_expression_key(k))
      merge_into(base[k], v);
    else
      base[k] = v;
  }
}

}  // namespace detail

/// Builds a model from {decays, noise_variances, f, g}; K is certified from
/// the expression trees.
inline SdeModel model_from_json(const nlohmann::json& j, const char* f_key = "f", const char* g_key = "g") {
  SdeModel m;
  m.decays = j.at("decays").get<std::vector<double>>();
  m.dim = m.decays.size();
  m.noise_variances = j.at("noise_variances").get<std::vector<double>>();
  for (const auto& e : j.at(f_key)) m.f.push_back(Expr::from_json(e));
  for (const auto& e : j.at(g_key)) m.g.push_back(Expr::from_json(e));
  const auto c = certify_constants(m);
  m.k_growth = c.k_growth;
  m.k_lip = c.k_lip;
  m.validate();
  return m;
}

/// Model with f = f1 + f2, g = g1 + g2 and its part (f1, g1); both carry the
/// full model's certified constants.
inline std::pair<SdeModel, SdeModel> split_models_from_json(const nlohmann::json& j) {
  SdeModel base;
  base.decays = j.at("decays").get<std::vector<double>>();
  base.dim = base.decays.size();
  base.noise_variances = j.at("noise_variances").get<std::vector<double>>();
  CoefficientSplit s;
  for (const auto& e : j.at("f1")) s.f1.push_back(Expr::from_json(e));
  for (const auto& e : j.at("f2")) s.f2.push_back(Expr::from_json(e));
  for (const auto& e : j.at("g1")) s.g1.push_back(Expr::from_json(e));
  for (const auto& e : j.at("g2")) s.g2.push_back(Expr::from_json(e));
  SdeModel full = s.full(base);
  const auto c = certify_constants(full);
  full.k_growth = c.k_growth;
  full.k_lip = c.k_lip;
  full.validate();
  SdeModel aa = s.aa_part(full);
  aa.validate();
  return {full, aa};
}

struct ExperimentConfig {
  std::string scenario;
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0 keeps the process-wide setting
  std::string output_dir;
  nlohmann::json params;

  nlohmann::json to_json() const {
    return {{"scenario", scenario}, {"seed", seed}, {"threads", threads}, {"output_dir", output_dir}, {"params", params}};
  }

  /// Shipped desk-scale defaults for a scenario.
  static ExperimentConfig defaults(const std::string& scenario) {
    ExperimentConfig c;
    c.scenario = scenario;
    c.params = detail::default_params(scenario);
    c.output_dir = "out/" + scenario;
    return c;
  }

  /// Validates `j` against the scenario schema (unknown keys and wrong types
  /// are rejected) and fills unspecified values from the defaults.
  static ExperimentConfig from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const std::set<std::string> top{"scenario", "seed", "threads", "output_dir", "params"};
    for (const auto& [k, v] : j.items())
      if (!top.count(k)) throw ConfigError("unknown key '" + k + "'");
    if (!j.contains("scenario") || !j.at("scenario").is_string()) throw ConfigError("config needs a string 'scenario'");
    ExperimentConfig c = defaults(j.at("scenario").get<std::string>());
    if (j.contains("seed")) {
      if (!detail::is_count(j.at("seed"))) throw ConfigError("seed must be a nonnegative 64-bit integer");
      c.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("threads")) {
      if (!detail::is_count(j.at("threads"))) throw ConfigError("threads must be a nonnegative integer");
      c.threads = j.at("threads").get<unsigned>();
    }
    if (j.contains("output_dir")) {
      if (!j.at("output_dir").is_string()) throw ConfigError("output_dir must be a string");
      c.output_dir = j.at("output_dir").get<std::string>();
    }
    if (j.contains("params")) {
      detail::check_value(c.params, j.at("params"), "params");
      detail::merge_into(c.params, j.at("params"));
    }
    c.validate();
    return c;
  }

  static ExperimentConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(path + ": " + e.what());
    }
    return from_json(j);
  }

  /// Range checks that do not need any simulation.
  void validate() const;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

inline void check_on_grid(double v, double h, const std::string& what) {
  const double k = v / h;
  require(std::abs(k - std::round(k)) < 1e-6, what + " must be a multiple of the grid step");
}

// Curve windows [base - k, base + shift + k] must sit inside [lo, hi].
inline void check_curve_fits(const json& c, double lo, double hi, double reach, const std::string& what) {
  const double base = c.at("base_time").get<double>();
  double far = 0.0;
  for (const auto& s : c.at("shifts")) far = std::max(far, s.get<double>());
  require(base - reach >= lo - 1e-9 && base + far + reach <= hi + 1e-9,
          what + ": base time, shifts and window must fit in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

inline double reach_of(const json& c) { return c.contains("k_max") ? c.at("k_max").get<double>() : 0.0; }

inline double grid_end(const json& g, double h) {
  return g.at("t0").get<double>() + h * static_cast<double>(g.at("steps").get<std::size_t>());
}

inline void check_radii_fit(const json& radii, double lo, double hi, const std::string& what) {
  for (const auto& r : radii) require(r.get<double>() > 0.0 && -r.get<double>() >= lo - 1e-9 && r.get<double>() <= hi + 1e-9,
                                      what + ": radii must be positive and fit in the grid");
}

// Generic rules keyed by name, applied throughout the params tree.
inline void check_ranges(const json& j, const std::string& path) {
  for (const auto& [k, v] : j.items()) {
    const std::string p = path + "." + k;
    if (v.is_object() && !is_expression_key(k)) {
      check_ranges(v, p);
      continue;
    }
    if (k == "paths") require(v.get<std::size_t>() >= 2, p + " must be at least 2");
    if (k == "steps" || k == "atom_cap" || k == "record_stride" || k == "iterations" || k == "time_stride" ||
        k == "ui_time_stride")
      require(v.get<std::size_t>() >= 1, p + " must be positive");
    if (k == "h" || k == "alpha" || k == "sigma" || k == "horizon" || k == "step" || k == "max_lag")
      require(v.get<double>() > 0.0, p + " must be positive");
    if (k == "k_max") require(v.get<int>() >= 1 && v.get<int>() <= 8, p + " must lie in [1, 8]");
    if (k == "decays")
      for (const auto& d : v) require(d.get<double>() > 0.0, p + " entries must be positive");
  }
}

}  // namespace detail

inline void ExperimentConfig::validate() const {
  using detail::require;
  detail::check_ranges(params, "params");
  const auto& p = params;
  if (scenario == "ou-counterexample") {
    const double h = p["covariance"]["h"].get<double>();
    for (const auto& c : p["covariance"]["cases"]) {
      require(c.size() == 3, "params.covariance.cases entries are [alpha, sigma, tau]");
      require(c[0].get<double>() > 0.0 && c[1].get<double>() > 0.0 && c[2].get<double>() >= 0.0,
              "params.covariance.cases need alpha, sigma > 0 and tau >= 0");
      detail::check_on_grid(c[2].get<double>(), h, "covariance tau");
    }
    const auto& g = p["gap"];
    const auto w = g["average_window"].get<std::vector<double>>();
    require(w.size() == 2 && w[0] >= 0.0 && w[1] > w[0], "params.gap.average_window must be [a, b] with 0 <= a < b");
    for (double lag : g["lags"].get<std::vector<double>>()) {
      require(lag > 0.0, "gap lags must be positive");
      detail::check_on_grid(lag, g["h"].get<double>(), "gap lag");
      require(w[1] + lag <= g["horizon"].get<double>() + 1e-9, "gap window plus lag exceeds the horizon");
    }
    detail::check_curve_fits(p["path_curve"], 0.0, g["horizon"].get<double>(), detail::reach_of(p["path_curve"]), "path_curve");
  } else if (scenario == "remark-nonvector") {
    for (double t : p["times"].get<std::vector<double>>()) {
      require(t >= 0.0 && t <= p["horizon"].get<double>() + 1e-9, "params.times must lie in [0, horizon]");
      detail::check_on_grid(t, p["h"].get<double>(), "variance time");
    }
    detail::check_curve_fits(p["onedim"], 0.0, p["horizon"].get<double>(), 0.0, "onedim");
  } else if (scenario == "theorem-aa") {
    const auto m = model_from_json(p["model"]);
    require(theta_prime(m) < 1.0, "theorem-aa: model has theta' = " + std::to_string(theta_prime(m)) + " >= 1");
    require(p["simulation"]["steps"].get<std::size_t>() % p["simulation"]["record_stride"].get<std::size_t>() == 0,
            "simulation.record_stride must divide simulation.steps");
    const auto& s = p["simulation"];
    detail::check_curve_fits(p["curves"], s["t0"].get<double>(), detail::grid_end(s, s["h"].get<double>()),
                             detail::reach_of(p["curves"]), "curves");
  } else if (scenario == "theorem-main") {
    const auto [full, aa] = split_models_from_json(p["model"]);
    require(theta_prime(full) < 1.0, "theorem-main: model has theta' = " + std::to_string(theta_prime(full)) + " >= 1");
    require(p["simulation"]["steps"].get<std::size_t>() % p["simulation"]["record_stride"].get<std::size_t>() == 0,
            "simulation.record_stride must divide simulation.steps");
    require(p["probe"]["steps"].get<std::size_t>() % p["probe"]["record_stride"].get<std::size_t>() == 0,
            "probe.record_stride must divide probe.steps");
    require(p["check"]["p"].get<double>() > 0.0, "check.p must be positive");
    const auto& s = p["simulation"];
    const double h = s["h"].get<double>();
    detail::check_curve_fits(p["check"], s["t0"].get<double>(), detail::grid_end(s, h), detail::reach_of(p["check"]), "check");
    detail::check_radii_fit(p["check"]["radii"], s["t0"].get<double>(), detail::grid_end(s, h), "check");
    nlohmann::json probe_window{{"base_time", p["probe"]["base_time"]}, {"shifts", {0.0}}};
    detail::check_curve_fits(probe_window, p["probe"]["t0"].get<double>(), detail::grid_end(p["probe"], h),
                             detail::reach_of(p["check"]), "probe");
  } else if (scenario == "superposition") {
    for (const char* key : {"f1", "f2"})
      for (const auto& e : p[key])
        require(std::isfinite(Expr::from_json(e).lipschitz_bound()), std::string(key) + " must be Lipschitz in x");
    const auto& o = p["ou"];
    const double lo = o["t0"].get<double>(), hi = detail::grid_end(o, o["h"].get<double>());
    detail::check_curve_fits(p["curves"], lo, hi, detail::reach_of(p["curves"]), "curves");
    detail::check_radii_fit(p["ergodic"]["radii"], lo, hi, "ergodic");
  }
}

}  // namespace aalab
