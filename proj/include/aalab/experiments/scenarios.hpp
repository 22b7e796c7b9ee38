#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "aalab/core/parallel.hpp"
#include "aalab/core/quadrature.hpp"
#include "aalab/diagnostics/distribution.hpp"
#include "aalab/empirical/integrability.hpp"
#include "aalab/experiments/config.hpp"
#include "aalab/experiments/table.hpp"
#include "aalab/measures/ergodic.hpp"
#include "aalab/processes/ou.hpp"
#include "aalab/sde/simulate.hpp"

namespace aalab {

using TableSet = std::map<std::string, Table>;

/// One acceptance check: `value` compared with `threshold` by `relation`.
struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation;

  nlohmann::json to_json() const {
    return {{"name", name}, {"pass", pass}, {"value", value}, {"threshold", threshold}, {"relation", relation}};
  }
};

namespace detail {

inline Check check_le(std::string name, double value, double threshold) {
  return {std::move(name), value <= threshold, value, threshold, "<="};
}
inline Check check_lt(std::string name, double value, double threshold) {
  return {std::move(name), value < threshold, value, threshold, "<"};
}
inline Check check_gt(std::string name, double value, double threshold) {
  return {std::move(name), value > threshold, value, threshold, ">"};
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline const Table& table(const TableSet& t, const std::string& name) {
  const auto it = t.find(name);
  if (it == t.end()) throw ConfigError("bundle is missing table '" + name + "'");
  return it->second;
}

// Row of `t` whose `key` column equals v (within 1e-9).
inline std::size_t find_row(const Table& t, const std::string& key, double v) {
  const auto col = t.column(key);
  for (std::size_t i = 0; i < col.size(); ++i)
    if (std::abs(col[i] - v) <= 1e-9 * std::max(1.0, std::abs(v))) return i;
  throw ConfigError("table has no row with " + key + " = " + num(v));
}

inline double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

inline DiagnosticOptions cap_options(const nlohmann::json& j) {
  DiagnosticOptions o;
  o.atom_cap = j.at("atom_cap").get<std::size_t>();
  return o;
}

inline PathWindow window_of(const nlohmann::json& j) { return {j.at("k_max").get<int>(), j.at("step").get<double>()}; }

inline TimeGrid grid_of(const nlohmann::json& j) {
  return {j.at("t0").get<double>(), j.at("h").get<double>(), j.at("steps").get<std::size_t>()};
}

// Shared checks on a distribution curve table: every ratio within the factor,
// and the ratio at the last (closest-return) shift.
inline void flat_checks(std::vector<Check>& out, const TableSet& t, const std::string& name, double factor,
                        bool all_shifts) {
  const auto ratio = table(t, name).column("ratio");
  if (all_shifts)
    out.push_back(check_le(name + ": max ratio to noise floor", max_of(ratio), factor));
  else
    out.push_back(check_le(name + ": ratio to noise floor at the tail shift", ratio.back(), factor));
}

inline void ui_check(std::vector<Check>& out, const TableSet& t, const std::string& name, double fraction) {
  const auto v = table(t, name).column("value");
  out.push_back(check_le(name + ": tail moment at the largest cutoff", v.back(), fraction * v.front()));
}

// Ratios from the second half of the contraction sequence.
inline double contraction_tail(const Table& c) {
  std::vector<double> ratios;
  for (double r : c.column("ratio"))
    if (!std::isnan(r)) ratios.push_back(r);
  return max_of({ratios.begin() + static_cast<std::ptrdiff_t>(ratios.size() / 2), ratios.end()});
}

// Per-grid-point sample statistics, reduced serially over paths.
struct Moments {
  double mean = 0.0, var = 0.0, se_var = 0.0;
};
inline Moments moments(const PathEnsemble& e, std::size_t j) {
  const auto m = static_cast<double>(e.paths());
  CompensatedSum s;
  for (std::size_t p = 0; p < e.paths(); ++p) s.add(e.at(p, j));
  Moments out;
  out.mean = s.value() / m;
  CompensatedSum s2, s4;
  for (std::size_t p = 0; p < e.paths(); ++p) {
    const double d = e.at(p, j) - out.mean;
    s2.add(d * d);
    s4.add(d * d * d * d);
  }
  out.var = s2.value() / (m - 1.0);
  const double m2 = s2.value() / m, m4 = s4.value() / m;
  out.se_var = std::sqrt(std::max(0.0, m4 - m2 * m2) / m);
  return out;
}

inline Table constants_table(const SdeModel& m, const MildSolution* sol) {
  Table t({"k", "delta", "trace_q", "theta", "theta_prime", "sup_norm", "bias_bound"});
  t.add({m.k(), m.delta(), m.trace_q(), theta(m), theta_prime(m), sol ? sol->sup_norm : 0.0, sol ? sol->bias_bound : 0.0});
  return t;
}

inline Table ui_table(const PathEnsemble& e, const std::vector<double>& cutoffs, std::size_t stride, double p) {
  std::vector<std::vector<double>> norms;
  for (std::size_t j = 0; j < e.grid().points(); j += stride) {
    std::vector<double> col(e.paths());
    for (std::size_t m = 0; m < e.paths(); ++m) col[m] = detail::norm(e.state(m, j), e.dim());
    norms.push_back(std::move(col));
  }
  return to_table(uniform_integrability_profile(norms, p, cutoffs));
}

// ---------------------------------------------------------------- OU

inline TableSet run_ou_counterexample_tables(const ExperimentConfig& cfg) {
  const auto& p = cfg.params;
  TableSet out;

  const auto& cv = p["covariance"];
  const double h = cv["h"].get<double>();
  const std::size_t paths = cv["paths"].get<std::size_t>();
  Table cov({"case", "alpha", "sigma", "lag", "estimate", "se", "exact"});
  std::size_t ci = 0;
  for (const auto& c : cv["cases"]) {
    const double alpha = c[0].get<double>(), sigma = c[1].get<double>(), tau = c[2].get<double>();
    const auto n = static_cast<std::size_t>(std::llround(std::max(cv["max_lag"].get<double>(), tau) / h));
    const auto ens = simulate_ou({alpha, sigma}, {0.0, h, n}, paths, cfg.seed, "ou-cov-" + std::to_string(ci));
    std::vector<std::vector<double>> rows(n + 1);
    parallel::for_each_index(n + 1, [&](std::size_t k) {
      CompensatedSum a, b, ab, ab2;
      for (std::size_t m = 0; m < paths; ++m) {
        const double x0 = ens.at(m, 0), xk = ens.at(m, k);
        a.add(x0);
        b.add(xk);
        ab.add(x0 * xk);
        ab2.add(x0 * x0 * xk * xk);
      }
      const auto M = static_cast<double>(paths);
      const double mp = ab.value() / M;
      const double est = mp - (a.value() / M) * (b.value() / M);
      const double se = std::sqrt(std::max(0.0, ab2.value() / M - mp * mp) / M);
      const double lag = static_cast<double>(k) * h;
      rows[k] = {static_cast<double>(ci), alpha, sigma, lag, est, se, sigma * sigma * std::exp(-alpha * lag)};
    });
    for (auto& r : rows) cov.add(std::move(r));
    ++ci;
  }
  out["covariance"] = std::move(cov);

  const auto& g = p["gap"];
  const double alpha = g["alpha"].get<double>(), sigma = g["sigma"].get<double>(), gh = g["h"].get<double>();
  const std::size_t gpaths = g["paths"].get<std::size_t>();
  const auto n = static_cast<std::size_t>(std::llround(g["horizon"].get<double>() / gh));
  const auto ens = simulate_ou({alpha, sigma}, {0.0, gh, n}, gpaths, cfg.seed, "ou");
  const auto w = g["average_window"].get<std::vector<double>>();
  const std::size_t j0 = ens.grid().index_of(w[0]), j1 = ens.grid().index_of(w[1]);
  Table gap({"lag", "estimate", "se", "exact"});
  for (double lag : g["lags"].get<std::vector<double>>()) {
    const auto k = static_cast<std::size_t>(std::llround(lag / gh));
    std::vector<double> per_path(gpaths);
    parallel::for_each_index(gpaths, [&](std::size_t m) {
      CompensatedSum s;
      for (std::size_t j = j0; j <= j1; ++j) {
        const double d = ens.at(m, j + k) - ens.at(m, j);
        s.add(d * d);
      }
      per_path[m] = s.value() / static_cast<double>(j1 - j0 + 1);
    });
    CompensatedSum s, s2;
    for (double v : per_path) s.add(v);
    const double mean = s.value() / static_cast<double>(gpaths);
    for (double v : per_path) s2.add((v - mean) * (v - mean));
    const double se = std::sqrt(s2.value() / static_cast<double>(gpaths - 1) / static_cast<double>(gpaths));
    gap.add({lag, mean, se, 2.0 * sigma * sigma * -std::expm1(-alpha * lag)});
  }
  out["gap"] = std::move(gap);

  const auto& pc = p["path_curve"];
  out["path_curve"] = to_table(path_distribution_curve(ens, {pc["base_time"].get<double>()}, window_of(pc),
                                                       pc["shifts"].get<std::vector<double>>(), cap_options(pc)));
  return out;
}

inline std::vector<Check> judge_ou_counterexample(const ExperimentConfig& cfg, const TableSet& t) {
  const auto& p = cfg.params;
  const double k = p["tolerance"]["se_multiple"].get<double>();
  std::vector<Check> out;
  const auto& cov = table(t, "covariance");
  std::size_t ci = 0;
  for (const auto& c : p["covariance"]["cases"]) {
    const double alpha = c[0].get<double>(), sigma = c[1].get<double>(), tau = c[2].get<double>();
    std::size_t row = cov.rows.size();
    for (std::size_t i = 0; i < cov.rows.size(); ++i)
      if (cov.rows[i][cov.index("case")] == static_cast<double>(ci) && std::abs(cov.rows[i][cov.index("lag")] - tau) < 1e-9)
        row = i;
    if (row == cov.rows.size()) throw ConfigError("covariance table lacks the configured lag");
    const double est = cov.rows[row][cov.index("estimate")], se = cov.rows[row][cov.index("se")];
    out.push_back(check_le("covariance alpha=" + num(alpha) + " sigma=" + num(sigma) + " tau=" + num(tau) + ": |error| / se",
                           std::abs(est - sigma * sigma * std::exp(-alpha * tau)) / se, k));
    ++ci;
  }
  const auto& g = p["gap"];
  const double alpha = g["alpha"].get<double>(), sigma = g["sigma"].get<double>();
  const auto& gap = table(t, "gap");
  double min_gap = std::numeric_limits<double>::infinity();
  for (double lag : g["lags"].get<std::vector<double>>()) {
    const auto row = gap.rows[find_row(gap, "lag", lag)];
    const double est = row[gap.index("estimate")], se = row[gap.index("se")];
    const double exact = 2.0 * sigma * sigma * -std::expm1(-alpha * lag);
    out.push_back(check_le("gap lag=" + num(lag) + ": relative error", std::abs(est - exact) / exact,
                           p["tolerance"]["gap_relative"].get<double>()));
    out.push_back(check_le("gap lag=" + num(lag) + ": |error| / se", std::abs(est - exact) / se, k));
    if (lag >= std::log(2.0) / alpha)
      out.push_back(check_gt("gap lag=" + num(lag) + ": stays above sigma^2 (not square-mean Cauchy)", est, sigma * sigma));
    min_gap = std::min(min_gap, est);
  }
  const double factor = p["tolerance"]["flat_factor"].get<double>();
  flat_checks(out, t, "path_curve", factor, true);
  out.push_back(check_gt("square-mean gap on the same ensemble stays above sigma^2 / 2", min_gap, 0.5 * sigma * sigma));
  return out;
}

// ---------------------------------------------------------------- Remark

inline TableSet run_remark_nonvector_tables(const ExperimentConfig& cfg) {
  const auto& p = cfg.params;
  const double alpha = p["alpha"].get<double>(), sigma = p["sigma"].get<double>(), h = p["h"].get<double>();
  const auto n = static_cast<std::size_t>(std::llround(p["horizon"].get<double>() / h));
  const auto x = simulate_ou({alpha, sigma}, {0.0, h, n}, p["paths"].get<std::size_t>(), cfg.seed, "ou");
  const auto z = sum_process(x, broadcast_at_index(x, 0));
  TableSet out;
  std::vector<Moments> mom(n + 1);
  parallel::for_each_index(n + 1, [&](std::size_t j) { mom[j] = moments(z, j); });
  Table var({"t", "variance", "se", "exact"});
  for (std::size_t j = 0; j <= n; ++j) {
    const double t = z.grid().time(j);
    var.add({t, mom[j].var, mom[j].se_var, 2.0 * sigma * sigma * (1.0 + std::exp(-alpha * std::abs(t)))});
  }
  out["variance"] = std::move(var);
  const auto& od = p["onedim"];
  out["onedim"] = to_table(onedim_distribution_curve(z, {od["base_time"].get<double>()},
                                                     od["shifts"].get<std::vector<double>>(), cap_options(od)));
  return out;
}

inline std::vector<Check> judge_remark_nonvector(const ExperimentConfig& cfg, const TableSet& t) {
  const auto& p = cfg.params;
  const double alpha = p["alpha"].get<double>(), sigma = p["sigma"].get<double>();
  const double k = p["tolerance"]["se_multiple"].get<double>();
  std::vector<Check> out;
  const auto& var = table(t, "variance");
  for (double time : p["times"].get<std::vector<double>>()) {
    const auto row = var.rows[find_row(var, "t", time)];
    const double exact = 2.0 * sigma * sigma * (1.0 + std::exp(-alpha * std::abs(time)));
    out.push_back(check_le("variance of Z at t=" + num(time) + ": |error| / se",
                           std::abs(row[var.index("variance")] - exact) / row[var.index("se")], k));
  }
  const auto ratio = table(t, "onedim").column("ratio");
  out.push_back(check_gt("onedim curve of Z at the largest shift: ratio to noise floor", ratio.back(),
                         p["onedim"]["refute_factor"].get<double>()));
  return out;
}

// ---------------------------------------------------------------- Theorem (AA coefficients)

inline Table contraction_table(const ContractionReport& r) {
  Table t({"iteration", "sup_difference", "ratio"});
  for (std::size_t k = 0; k < r.sup_differences.size(); ++k)
    t.add({static_cast<double>(k), r.sup_differences[k], k == 0 || k > r.ratios.size() ? std::nan("") : r.ratios[k - 1]});
  return t;
}

inline TableSet run_theorem_aa_tables(const ExperimentConfig& cfg) {
  const auto& p = cfg.params;
  const SdeModel model = model_from_json(p["model"]);
  const auto& s = p["simulation"];
  MildOptions mo;
  mo.record_stride = s["record_stride"].get<std::size_t>();
  const auto sol = simulate_mild(model, grid_of(s), s["burn_in"].get<double>(), s["paths"].get<std::size_t>(), cfg.seed, mo);
  TableSet out;
  out["constants"] = constants_table(model, &sol);

  const auto& c = p["contraction"];
  ContractionOptions co;
  co.iterations = c["iterations"].get<std::size_t>();
  co.slack = c["slack"].get<double>();
  const TimeGrid cg{c["t0"].get<double>(), s["h"].get<double>(), c["steps"].get<std::size_t>()};
  out["contraction"] = contraction_table(contraction_rate(model, cg, c["paths"].get<std::size_t>(), cfg.seed, co));

  const auto& cu = p["curves"];
  const auto shifts = cu["shifts"].get<std::vector<double>>();
  const std::vector<double> base{cu["base_time"].get<double>()};
  out["onedim"] = to_table(onedim_distribution_curve(sol.paths, base, shifts, cap_options(cu)));
  out["path"] = to_table(path_distribution_curve(sol.paths, base, window_of(cu), shifts, cap_options(cu)));
  const auto& ui = p["ui"];
  out["ui"] = ui_table(sol.paths, ui["cutoffs"].get<std::vector<double>>(), ui["time_stride"].get<std::size_t>(), 2.0);
  return out;
}

inline std::vector<Check> judge_theorem_aa(const ExperimentConfig& cfg, const TableSet& t) {
  const auto& p = cfg.params;
  std::vector<Check> out;
  const auto& k = table(t, "constants");
  const double th = k.column("theta").front();
  out.push_back(check_lt("theta'", k.column("theta_prime").front(), 1.0));
  out.push_back(check_le("Picard contraction: max tail ratio", contraction_tail(table(t, "contraction")),
                         th * (1.0 + p["contraction"]["slack"].get<double>())));
  const double factor = p["curves"]["flat_factor"].get<double>();
  flat_checks(out, t, "path", factor, true);
  flat_checks(out, t, "onedim", factor, false);
  ui_check(out, t, "ui", p["ui"]["tail_fraction"].get<double>());
  return out;
}

// ---------------------------------------------------------------- Theorem (decomposition)

inline TableSet run_theorem_main_tables(const ExperimentConfig& cfg) {
  const auto& p = cfg.params;
  const auto [full, aa] = split_models_from_json(p["model"]);
  const auto& s = p["simulation"];
  MildOptions mo;
  mo.record_stride = s["record_stride"].get<std::size_t>();
  const double burn = s["burn_in"].get<double>();
  const std::size_t paths = s["paths"].get<std::size_t>();
  TableSet out;
  const auto& c = p["check"];
  const auto radii = c["radii"].get<std::vector<double>>();
  PaaReport rep;
  {
    // X and Y share seed and generator id, hence the noise realization
    const auto x = simulate_mild(full, grid_of(s), burn, paths, cfg.seed, mo);
    const auto y = simulate_mild(aa, grid_of(s), burn, paths, cfg.seed, mo);
    out["constants"] = constants_table(full, &x);
    PaaOptions po;
    po.base_times = {c["base_time"].get<double>()};
    po.window = window_of(c);
    po.ui_cutoffs = c["ui_cutoffs"].get<std::vector<double>>();
    po.ui_time_stride = c["ui_time_stride"].get<std::size_t>();
    po.diag = cap_options(c);
    rep = paa_p_distribution_check(x.paths, y.paths, c["p"].get<double>(), WeightMeasure::lebesgue(), radii,
                                   c["shifts"].get<std::vector<double>>(), po);
    Table zm({"t", "value"});
    for (std::size_t j = 0; j < rep.z_moment.size(); ++j) zm.add({x.paths.grid().time(j), rep.z_moment[j]});
    out["z_moment"] = std::move(zm);
  }
  out["ergodic"] = to_table(rep.ergodic);
  out["y_onedim"] = to_table(rep.y_onedim);
  out["y_path"] = to_table(rep.y_path);
  out["y_ui"] = to_table(*rep.y_ui);

  // Coefficients shifted by gamma: X_gamma vs its part Y_gamma on a fixed window.
  const auto& pr = p["probe"];
  MildOptions po;
  po.record_stride = pr["record_stride"].get<std::size_t>();
  po.generator_id = "probe";
  const TimeGrid pg{pr["t0"].get<double>(), s["h"].get<double>(), pr["steps"].get<std::size_t>()};
  const PathWindow win = window_of(c);
  Table probe({"gamma", "d_bl", "z_rms", "coefficient_gap"});
  for (double gamma : pr["shifts"].get<std::vector<double>>()) {
    const auto xg = simulate_mild(full.shifted(gamma), pg, burn, pr["paths"].get<std::size_t>(), cfg.seed, po);
    const auto yg = simulate_mild(aa.shifted(gamma), pg, burn, pr["paths"].get<std::size_t>(), cfg.seed, po);
    std::vector<double> times;
    const auto offsets = window_offsets(xg.paths.grid(), win, &times);
    const auto base = static_cast<long long>(xg.paths.grid().index_of(pr["base_time"].get<double>()));
    const Metric metric = Metric::weighted_window(times, full.dim, win.k_max);
    const PathBlocks blocks(xg.paths.paths(), cap_options(c));
    const double d = bl_distance(atoms_at(xg.paths, blocks.blocks[0], base, offsets, metric),
                                 atoms_at(yg.paths, blocks.blocks[0], base, offsets, metric))
                         .value;
    double z_rms = 0.0, coef = 0.0;
    const std::vector<double> zero(full.dim, 0.0);
    for (long long o : offsets) {
      const auto j = static_cast<std::size_t>(base + o);
      CompensatedSum sq;
      for (std::size_t m = 0; m < xg.paths.paths(); ++m)
        for (std::size_t i = 0; i < full.dim; ++i) {
          const double dz = xg.paths.at(m, j, i) - yg.paths.at(m, j, i);
          sq.add(dz * dz);
        }
      z_rms = std::max(z_rms, std::sqrt(sq.value() / static_cast<double>(xg.paths.paths())));
      const double tt = xg.paths.grid().time(j) + gamma;
      for (std::size_t i = 0; i < full.f.size(); ++i) coef = std::max(coef, std::abs(full.f[i](tt, zero) - aa.f[i](tt, zero)));
      for (std::size_t i = 0; i < full.g.size(); ++i) coef = std::max(coef, std::abs(full.g[i](tt, zero) - aa.g[i](tt, zero)));
    }
    probe.add({gamma, d, z_rms, coef});
  }
  out["probe"] = std::move(probe);
  return out;
}

inline std::vector<Check> judge_theorem_main(const ExperimentConfig& cfg, const TableSet& t) {
  const auto& c = cfg.params["check"];
  std::vector<Check> out;
  out.push_back(check_lt("theta'", table(t, "constants").column("theta_prime").front(), 1.0));
  const auto& erg = table(t, "ergodic");
  const auto r = erg.column("r"), v = erg.column("value");
  out.push_back(check_lt("ergodic mean of Z moment: value at r=" + num(r.back()) + " / value at r=" + num(r.front()),
                         v.front() > 0.0 ? v.back() / v.front() : 0.0, c["decay_threshold"].get<double>()));
  const double factor = c["flat_factor"].get<double>();
  flat_checks(out, t, "y_path", factor, true);
  flat_checks(out, t, "y_onedim", factor, false);
  ui_check(out, t, "y_ui", c["ui_tail_fraction"].get<double>());
  const auto d = table(t, "probe").column("d_bl");
  out.push_back(check_le("shifted-coefficient probe: d_BL(X_gamma, Y_gamma) at the last shift", d.back(),
                         cfg.params["probe"]["decay_threshold"].get<double>() * d.front()));
  return out;
}

// ---------------------------------------------------------------- Superposition

inline TableSet run_superposition_tables(const ExperimentConfig& cfg) {
  const auto& p = cfg.params;
  const auto& o = p["ou"];
  const TimeGrid grid{o["t0"].get<double>(), o["h"].get<double>(), o["steps"].get<std::size_t>()};
  const auto y = simulate_ou({o["alpha"].get<double>(), o["sigma"].get<double>()}, grid, o["paths"].get<std::size_t>(),
                             cfg.seed, "ou");
  const Expr f1 = Expr::from_json(p["f1"][0]), f2 = Expr::from_json(p["f2"][0]);
  PathEnsemble g(grid, 1, y.paths(), y.seed(), "G");
  std::vector<double> h_rms(grid.points());
  parallel::for_each_index(grid.points(), [&](std::size_t j) {
    const double t = grid.time(j);
    CompensatedSum s;
    for (std::size_t m = 0; m < y.paths(); ++m) {
      const std::span<const double> x(y.state(m, j), 1);
      g.at(m, j) = f1(t, x);
      const double hv = f2(t, x);
      s.add(hv * hv);
    }
    h_rms[j] = std::sqrt(s.value() / static_cast<double>(y.paths()));
  });
  TableSet out;
  const auto& cu = p["curves"];
  const auto shifts = cu["shifts"].get<std::vector<double>>();
  const std::vector<double> base{cu["base_time"].get<double>()};
  out["g_onedim"] = to_table(onedim_distribution_curve(g, base, shifts, cap_options(cu)));
  out["g_path"] = to_table(path_distribution_curve(g, base, window_of(cu), shifts, cap_options(cu)));
  Table hm({"t", "value"});
  for (std::size_t j = 0; j < grid.points(); ++j) hm.add({grid.time(j), h_rms[j]});
  out["h_moment"] = std::move(hm);
  out["h_ergodic"] = to_table(ergodic_mean(SampledFunction::from_grid(GridSamples{grid.t0, grid.h, h_rms}, "H-moment"),
                                           WeightMeasure::lebesgue(), p["ergodic"]["radii"].get<std::vector<double>>(), false));
  return out;
}

inline std::vector<Check> judge_superposition(const ExperimentConfig& cfg, const TableSet& t) {
  const auto& p = cfg.params;
  std::vector<Check> out;
  const double factor = p["curves"]["flat_factor"].get<double>();
  flat_checks(out, t, "g_path", factor, true);
  flat_checks(out, t, "g_onedim", factor, false);
  const auto& erg = table(t, "h_ergodic");
  const auto r = erg.column("r"), v = erg.column("value");
  out.push_back(check_lt("ergodic mean of H moment: value at r=" + num(r.back()) + " / value at r=" + num(r.front()),
                         v.front() > 0.0 ? v.back() / v.front() : 0.0, p["ergodic"]["decay_threshold"].get<double>()));
  return out;
}

}  // namespace detail

/// Runs the scenario's computation and returns its tables.
inline TableSet run_scenario_tables(const ExperimentConfig& cfg) {
  if (cfg.threads > 0) parallel::set_threads(cfg.threads);
  if (cfg.scenario == "ou-counterexample") return detail::run_ou_counterexample_tables(cfg);
  if (cfg.scenario == "remark-nonvector") return detail::run_remark_nonvector_tables(cfg);
  if (cfg.scenario == "theorem-aa") return detail::run_theorem_aa_tables(cfg);
  if (cfg.scenario == "theorem-main") return detail::run_theorem_main_tables(cfg);
  if (cfg.scenario == "superposition") return detail::run_superposition_tables(cfg);
  throw ConfigError("unknown scenario '" + cfg.scenario + "'");
}

/// Verdicts as a function of the tables and the config only.
inline std::vector<Check> judge(const ExperimentConfig& cfg, const TableSet& tables) {
  if (cfg.scenario == "ou-counterexample") return detail::judge_ou_counterexample(cfg, tables);
  if (cfg.scenario == "remark-nonvector") return detail::judge_remark_nonvector(cfg, tables);
  if (cfg.scenario == "theorem-aa") return detail::judge_theorem_aa(cfg, tables);
  if (cfg.scenario == "theorem-main") return detail::judge_theorem_main(cfg, tables);
  if (cfg.scenario == "superposition") return detail::judge_superposition(cfg, tables);
  throw ConfigError("unknown scenario '" + cfg.scenario + "'");
}

}  // namespace aalab
