#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aalab/diagnostics/distribution.hpp"
#include "aalab/empirical/bl_distance.hpp"
#include "aalab/experiments/bundle.hpp"
#include "aalab/processes/ou.hpp"
#include "aalab/recurrence/recurrence.hpp"
#include "aalab/sde/simulate.hpp"
#include "aalab/seminorms/seminorms.hpp"

using namespace aalab;
using nlohmann::json;

namespace {

constexpr int kPass = 0;
constexpr int kRefuted = 1;
constexpr int kUsage = 2;
constexpr int kRuntime = 3;

// A catalog name (LEVITAN) or an expression in JSON form.
Expr parse_function(const std::string& text) {
  const auto j = json::parse(text, nullptr, false);
  return Expr::from_json(j.is_discarded() ? json(text) : j);
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Almost automorphy lab: recurrence, seminorm and distribution diagnostics"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = hardware)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "simulate an ensemble and save it in binary form");
  sim->require_subcommand(1);
  struct {
    double alpha = 1.0, sigma = 1.0, t0 = 0.0, h = 0.01, burn_in = 10.0;
    std::size_t steps = 1000, paths = 1000, stride = 1;
    std::uint64_t seed = 1;
    std::string out, model;
  } so;
  auto* sim_ou = sim->add_subcommand("ou", "stationary Ornstein-Uhlenbeck, exact transitions");
  auto* sim_mild = sim->add_subcommand("mild", "mild solution of a model file {decays, noise_variances, f, g}");
  for (auto* s : {sim_ou, sim_mild}) {
    s->add_option("--t0", so.t0);
    s->add_option("--dt", so.h, "time step");
    s->add_option("--steps", so.steps);
    s->add_option("--paths", so.paths);
    s->add_option("--seed", so.seed);
    s->add_option("--out", so.out, "ensemble file")->required();
  }
  sim_ou->add_option("--alpha", so.alpha);
  sim_ou->add_option("--sigma", so.sigma);
  sim_mild->add_option("--model", so.model)->required()->check(CLI::ExistingFile);
  sim_mild->add_option("--burn-in", so.burn_in);
  sim_mild->add_option("--stride", so.stride, "record every k-th step");

  // seminorm
  auto* semi = app.add_subcommand("seminorm", "Stepanov, Weyl or Besicovitch seminorm of a function of t");
  std::string fn, kind = "weyl";
  double p = 2.0;
  bool ordering = false;
  semi->add_option("--function", fn, "catalog name or expression JSON")->required();
  semi->add_option("--kind", kind)->check(CLI::IsMember({"stepanov", "weyl", "besicovitch"}));
  semi->add_option("--p", p);
  semi->add_flag("--ordering", ordering, "report all three and the ordering check");

  // recurrence
  auto* rec = app.add_subcommand("recurrence", "almost-period scan or double-shift tests");
  std::string test = "double-shift";
  double eps = 0.1, length = 100.0, shift_step = 0.01, grid_step = 0.01, tol = 0.05;
  std::vector<double> window{-10.0, 10.0}, shifts;
  rec->add_option("--test", test)->check(CLI::IsMember({"almost-period", "double-shift", "compact"}));
  rec->add_option("--function", fn)->required();
  rec->add_option("--epsilon", eps);
  rec->add_option("--length", length, "shift range [0, L] for the scan");
  rec->add_option("--shift-step", shift_step);
  rec->add_option("--window", window)->expected(2);
  rec->add_option("--grid-step", grid_step);
  rec->add_option("--shifts", shifts);
  rec->add_option("--tol", tol);

  // distance
  auto* dist = app.add_subcommand("distance", "bounded Lipschitz distance of two weighted point sets (CSV)");
  std::string a_csv, b_csv, method = "auto";
  dist->add_option("a", a_csv)->required()->check(CLI::ExistingFile);
  dist->add_option("b", b_csv)->required()->check(CLI::ExistingFile);
  dist->add_option("--method", method)->check(CLI::IsMember({"auto", "lp", "line"}));

  // diagnose
  auto* diag = app.add_subcommand("diagnose", "distribution curve of a saved ensemble");
  std::string ens_file, curve = "onedim", curve_out;
  std::vector<double> base{0.0}, tuple;
  int k_max = 3;
  double wstep = 0.1;
  std::size_t cap = 500;
  diag->add_option("--ensemble", ens_file)->required()->check(CLI::ExistingFile);
  diag->add_option("--kind", curve)->check(CLI::IsMember({"onedim", "findim", "path"}));
  diag->add_option("--base", base, "base times (tuple for findim)");
  diag->add_option("--shifts", shifts)->required();
  diag->add_option("--k-max", k_max);
  diag->add_option("--step", wstep);
  diag->add_option("--atom-cap", cap);
  diag->add_option("--out", curve_out, "curve CSV");

  // experiment
  auto* exp = app.add_subcommand("experiment", "run a named experiment and write its bundle");
  std::string name, config_file, out_dir;
  exp->add_option("name", name)->required()->check(CLI::IsMember(scenario_names()));
  exp->add_option("--config", config_file)->check(CLI::ExistingFile);
  exp->add_option("--out", out_dir);

  // validate-config
  auto* val = app.add_subcommand("validate-config", "check a config against its scenario schema");
  bool show = false;
  val->add_option("file", config_file)->required();
  val->add_flag("--print", show, "print the resolved config");

  // judge
  auto* jdg = app.add_subcommand("judge", "re-derive the verdicts of a bundle from its CSV tables");
  jdg->add_option("dir", out_dir)->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }
  if (threads > 0) parallel::set_threads(threads);

  try {
    if (sim->parsed()) {
      const TimeGrid grid{so.t0, so.h, so.steps};
      json summary;
      if (sim_ou->parsed()) {
        const auto ens = simulate_ou({so.alpha, so.sigma}, grid, so.paths, so.seed);
        save_ensemble(so.out, ens);
      } else {
        const auto model = model_from_json(read_json(so.model));
        MildOptions mo;
        mo.record_stride = so.stride;
        const auto sol = simulate_mild(model, grid, so.burn_in, so.paths, so.seed, mo);
        save_ensemble(so.out, sol.paths);
        summary = sol.to_json();
        summary["theta"] = theta_report(model).to_json();
      }
      summary["out"] = so.out;
      print(summary);
      return kPass;
    }
    if (semi->parsed()) {
      const SampledFunction f(parse_function(fn));
      if (ordering) {
        const auto r = seminorm_ordering_check(f, p);
        print(r.to_json());
        return r.pass() ? kPass : kRefuted;
      }
      const auto k = kind == "stepanov" ? SeminormKind::stepanov(p)
                     : kind == "weyl"   ? SeminormKind::weyl(p)
                                        : SeminormKind::besicovitch(p);
      print(seminorm(f, k).to_json());
      return kPass;
    }
    if (rec->parsed()) {
      const SampledFunction f(parse_function(fn));
      const Window w{window[0], window[1]};
      RecurrenceReport r;
      if (test == "almost-period")
        r = almost_period_scan(f, eps, w, length, shift_step, 0.0, grid_step);
      else if (test == "double-shift")
        r = aa_double_shift_test(f, shifts, w, grid_step, tol);
      else
        r = compact_aa_uniformity(f, shifts, w, grid_step, tol);
      print(r.to_json());
      return r.refutes() ? kRefuted : kPass;
    }
    if (dist->parsed()) {
      std::ifstream ia(a_csv), ib(b_csv);
      const auto a = EmpiricalMeasure::read_csv(ia), b = EmpiricalMeasure::read_csv(ib);
      const auto r = method == "lp" ? bl_distance_transport(a, b) : method == "line" ? bl_distance_line(a, b) : bl_distance(a, b);
      print({{"value", r.value}, {"method", r.method}, {"duality_gap", r.duality_gap}});
      return kPass;
    }
    if (diag->parsed()) {
      const auto ens = load_ensemble(ens_file);
      DiagnosticOptions o;
      o.atom_cap = cap;
      const auto c = curve == "onedim"   ? onedim_distribution_curve(ens, base, shifts, o)
                     : curve == "findim" ? findim_distribution_curve(ens, base, shifts, o)
                                         : path_distribution_curve(ens, base, {k_max, wstep}, shifts, o);
      if (!curve_out.empty()) {
        std::ofstream os(curve_out);
        c.write_csv(os);
      }
      print(c.to_json());
      return kPass;
    }
    if (exp->parsed()) {
      auto cfg = config_file.empty() ? ExperimentConfig::defaults(name) : ExperimentConfig::load(config_file);
      if (cfg.scenario != name) throw ConfigError("config is for scenario '" + cfg.scenario + "', not '" + name + "'");
      if (threads > 0) cfg.threads = threads;
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      const auto b = run_experiment(cfg);
      write_bundle(b, cfg.output_dir);
      for (const auto& c : b.checks)
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.value << ' ' << c.relation << ' ' << c.threshold
                  << '\n';
      std::cout << "bundle written to " << cfg.output_dir << '\n';
      return b.all_pass() ? kPass : kRefuted;
    }
    if (val->parsed()) {
      const auto cfg = ExperimentConfig::load(config_file);
      if (show) print(cfg.to_json());
      std::cout << config_file << ": valid " << cfg.scenario << " config\n";
      return kPass;
    }
    if (jdg->parsed()) {
      const auto r = judge_bundle(out_dir);
      for (const auto& c : r.checks) std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << '\n';
      std::cout << (r.agrees ? "recorded verdicts agree\n" : "recorded verdicts DISAGREE\n");
      return r.agrees && r.all_pass() ? kPass : kRefuted;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kUsage;
  } catch (const OutOfRange& e) {
    std::cerr << "out of range: " << e.what() << '\n';
    return kUsage;
  } catch (const ShapeMismatch& e) {
    std::cerr << "shape mismatch: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
