#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "aalab/core/error.hpp"
#include "aalab/core/parallel.hpp"
#include "aalab/empirical/bl_distance.hpp"
#include "aalab/empirical/empirical_measure.hpp"
#include "aalab/empirical/integrability.hpp"
#include "aalab/measures/ergodic.hpp"
#include "aalab/processes/ensemble.hpp"

namespace aalab {

struct DiagnosticOptions {
  std::size_t atom_cap = 500;            // atoms per side of every d_BL
  std::uint64_t subsample_seed = 0x5eed;
  std::size_t floor_pairs = 4;           // disjoint block pairs averaged into the floor
};

/// Discretized path-space window: offsets -k_max..k_max at `step`
/// (a multiple of the grid step), compared with the weighted window metric.
struct PathWindow {
  int k_max = 3;
  double step = 0.1;

  nlohmann::json to_json() const { return {{"k_max", k_max}, {"step", step}}; }
};

/// d_bl[i]: largest d_BL over base points between the laws at the base and
/// at base + shifts[i]; noise_floor: mean split-block self-distance at the
/// same base points; ratio = d_bl / noise_floor.
struct DistributionCurve {
  std::string kind;
  nlohmann::json marginal;
  std::vector<double> shifts;
  std::vector<double> d_bl;
  std::vector<double> noise_floor;
  std::vector<double> ratio;
  std::size_t atoms = 0;
  std::optional<UIProfile> ui;

  double max_ratio() const { return ratio.empty() ? 0.0 : *std::max_element(ratio.begin(), ratio.end()); }
  bool flat(double factor = 2.0) const { return max_ratio() <= factor; }

  void write_csv(std::ostream& os) const {
    os << "shift,d_bl,noise_floor,ratio\n";
    for (std::size_t i = 0; i < shifts.size(); ++i)
      os << detail::fmt_num(shifts[i]) << ',' << detail::fmt_num(d_bl[i]) << ',' << detail::fmt_num(noise_floor[i]) << ','
         << detail::fmt_num(ratio[i]) << '\n';
  }
  nlohmann::json to_json() const {
    nlohmann::json j{{"kind", kind},   {"marginal", marginal},       {"shifts", shifts}, {"d_bl", d_bl},
                     {"noise_floor", noise_floor}, {"ratio", ratio}, {"atoms", atoms},   {"max_ratio", max_ratio()}};
    if (ui) j["ui"] = ui->to_json();
    return j;
  }
};

namespace detail {

/// Fixed pseudo-random ordering of path indices cut into equal blocks of at
/// most `cap` paths; the first block carries the curve, pairs of blocks the
/// noise floor.
struct PathBlocks {
  std::vector<std::vector<std::size_t>> blocks;

  PathBlocks(std::size_t paths, const DiagnosticOptions& opt) {
    if (paths < 2) throw InvalidArgument("distribution diagnostics need at least 2 paths");
    if (opt.atom_cap == 0) throw InvalidArgument("atom cap must be positive");
    std::vector<std::size_t> order(paths);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(opt.subsample_seed);
    for (std::size_t i = paths - 1; i > 0; --i) std::swap(order[i], order[rng() % (i + 1)]);
    const std::size_t size = std::min(opt.atom_cap, paths / 2);
    const std::size_t count = std::min(paths / size, 2 * std::max<std::size_t>(opt.floor_pairs, 1));
    for (std::size_t b = 0; b < count; ++b) {
      blocks.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(b * size),
                          order.begin() + static_cast<std::ptrdiff_t>((b + 1) * size));
      std::sort(blocks.back().begin(), blocks.back().end());
    }
  }
  std::size_t atoms() const { return blocks.front().size(); }
  std::size_t pairs() const { return blocks.size() / 2; }
};

/// Atoms X(t_j + o) for o in `offsets` (grid-index offsets), per path.
inline EmpiricalMeasure atoms_at(const PathEnsemble& ens, const std::vector<std::size_t>& paths, long long base,
                                 const std::vector<long long>& offsets, const Metric& metric) {
  const std::size_t d = ens.dim();
  std::vector<double> coords;
  coords.reserve(paths.size() * offsets.size() * d);
  for (std::size_t m : paths)
    for (long long o : offsets) {
      const long long j = base + o;
      if (!ens.grid().contains_index(j)) throw OutOfRange("marginal time leaves the ensemble grid");
      const double* x = ens.state(m, static_cast<std::size_t>(j));
      coords.insert(coords.end(), x, x + d);
    }
  return EmpiricalMeasure::uniform(offsets.size() * d, std::move(coords), metric);
}

inline long long shift_index(const TimeGrid& g, double shift) {
  const double k = shift / g.h;
  const double r = std::round(k);
  if (std::abs(k - r) > 1e-6) throw OutOfRange("shift " + std::to_string(shift) + " is not a multiple of the grid step");
  return static_cast<long long>(r);
}

// Shared engine: `bases` are grid indices, `offsets` the marginal pattern.
inline DistributionCurve distribution_curve(const PathEnsemble& ens, const std::vector<long long>& bases,
                                            const std::vector<long long>& offsets, const Metric& metric,
                                            const std::vector<double>& shifts, const DiagnosticOptions& opt) {
  if (bases.empty() || shifts.empty()) throw InvalidArgument("distribution curve needs base points and shifts");
  const PathBlocks blocks(ens.paths(), opt);
  DistributionCurve out;
  out.shifts = shifts;
  out.atoms = blocks.atoms();
  std::vector<long long> ks;
  for (double s : shifts) ks.push_back(shift_index(ens.grid(), s));

  // floors first, then one job per (shift, base)
  std::vector<double> floors(bases.size() * blocks.pairs(), 0.0);
  parallel::for_each_index(floors.size(), [&](std::size_t i) {
    const std::size_t b = i / blocks.pairs(), p = i % blocks.pairs();
    floors[i] = bl_distance(atoms_at(ens, blocks.blocks[2 * p], bases[b], offsets, metric),
                            atoms_at(ens, blocks.blocks[2 * p + 1], bases[b], offsets, metric))
                    .value;
  });
  std::vector<double> d(shifts.size() * bases.size(), 0.0);
  // validate ranges before the parallel section
  for (long long k : ks)
    for (long long b : bases)
      for (long long o : offsets)
        if (!ens.grid().contains_index(b + k + o) || !ens.grid().contains_index(b + o))
          throw OutOfRange("shifted marginal leaves the ensemble grid");
  parallel::for_each_index(d.size(), [&](std::size_t i) {
    const std::size_t s = i / bases.size(), b = i % bases.size();
    if (ks[s] == 0) return;
    d[i] = bl_distance(atoms_at(ens, blocks.blocks[0], bases[b], offsets, metric),
                       atoms_at(ens, blocks.blocks[0], bases[b] + ks[s], offsets, metric))
               .value;
  });
  double floor = 0.0;
  for (double f : floors) floor += f;
  floor /= static_cast<double>(floors.size());
  for (std::size_t s = 0; s < shifts.size(); ++s) {
    double worst = 0.0;
    for (std::size_t b = 0; b < bases.size(); ++b) worst = std::max(worst, d[s * bases.size() + b]);
    out.d_bl.push_back(worst);
    out.noise_floor.push_back(floor);
    out.ratio.push_back(floor > 0.0 ? worst / floor : (worst > 0.0 ? std::numeric_limits<double>::infinity() : 0.0));
  }
  return out;
}

inline std::vector<long long> window_offsets(const TimeGrid& g, const PathWindow& w, std::vector<double>* times = nullptr) {
  if (w.k_max < 1) throw InvalidArgument("path window needs k_max >= 1");
  const double ratio = w.step / g.h;
  const auto stride = static_cast<long long>(std::llround(ratio));
  if (stride <= 0 || std::abs(ratio - static_cast<double>(stride)) > 1e-6)
    throw InvalidArgument("path window step must be a positive multiple of the grid step");
  const long long reach = shift_index(g, static_cast<double>(w.k_max));
  if (reach % stride != 0) throw InvalidArgument("path window step must divide 1");
  std::vector<long long> out;
  for (long long o = -reach; o <= reach; o += stride) {
    out.push_back(o);
    if (times) times->push_back(static_cast<double>(o) * g.h);
  }
  return out;
}

}  // namespace detail

/// Laws of X(t) vs X(t + tau) for each base time t.
inline DistributionCurve onedim_distribution_curve(const PathEnsemble& ens, const std::vector<double>& base_times,
                                                   const std::vector<double>& shifts, const DiagnosticOptions& opt = {}) {
  std::vector<long long> bases;
  for (double t : base_times) bases.push_back(static_cast<long long>(ens.grid().index_of(t)));
  const Metric metric = ens.dim() == 1 ? Metric::euclidean() : Metric::max_block(ens.dim());
  auto out = detail::distribution_curve(ens, bases, {0}, metric, shifts, opt);
  out.kind = "onedim";
  out.marginal = {{"base_times", base_times}};
  return out;
}

/// Joint laws at the tuple (t_1..t_k) vs the shifted tuple, max-coordinate metric.
inline DistributionCurve findim_distribution_curve(const PathEnsemble& ens, const std::vector<double>& tuple,
                                                   const std::vector<double>& shifts, const DiagnosticOptions& opt = {}) {
  if (tuple.empty() || tuple.size() > 4) throw InvalidArgument("time tuples need 1 to 4 entries");
  const auto first = static_cast<long long>(ens.grid().index_of(tuple.front()));
  std::vector<long long> offsets;
  for (double t : tuple) offsets.push_back(static_cast<long long>(ens.grid().index_of(t)) - first);
  auto out = detail::distribution_curve(ens, {first}, offsets, Metric::max_block(ens.dim()), shifts, opt);
  out.kind = "findim";
  out.marginal = {{"tuple", tuple}};
  return out;
}

/// Laws of the windowed paths X(t + .) vs X(t + tau + .) under the weighted
/// window metric, for each base time t.
inline DistributionCurve path_distribution_curve(const PathEnsemble& ens, const std::vector<double>& base_times,
                                                 const PathWindow& window, const std::vector<double>& shifts,
                                                 const DiagnosticOptions& opt = {}) {
  std::vector<double> times;
  const auto offsets = detail::window_offsets(ens.grid(), window, &times);
  std::vector<long long> bases;
  for (double t : base_times) bases.push_back(static_cast<long long>(ens.grid().index_of(t)));
  auto out = detail::distribution_curve(ens, bases, offsets, Metric::weighted_window(times, ens.dim(), window.k_max),
                                        shifts, opt);
  out.kind = "path";
  out.marginal = {{"base_times", base_times}, {"window", window.to_json()}};
  return out;
}

struct ConsistencyReport {
  double t = 0.0;
  double d_bl = 0.0;
  bool atoms_identical = false;
  bool pass() const { return atoms_identical && d_bl == 0.0; }
  nlohmann::json to_json() const { return {{"t", t}, {"d_bl", d_bl}, {"atoms_identical", atoms_identical}}; }
};

/// Law of the translated window (through the EnsembleWindow view) against the
/// index-shifted law of the unshifted window; the two must coincide exactly.
inline ConsistencyReport consistency_relation_check(const PathEnsemble& ens, double base_time, double t,
                                                    const PathWindow& window, const DiagnosticOptions& opt = {}) {
  std::vector<double> times;
  const auto offsets = detail::window_offsets(ens.grid(), window, &times);
  const auto base = static_cast<long long>(ens.grid().index_of(base_time));
  const long long k = detail::shift_index(ens.grid(), t);
  const Metric metric = Metric::weighted_window(times, ens.dim(), window.k_max);
  const detail::PathBlocks blocks(ens.paths(), opt);
  const auto& paths = blocks.blocks[0];

  // push-forward: re-index the unshifted window's samples by k
  std::vector<long long> shifted_offsets;
  for (long long o : offsets) shifted_offsets.push_back(o + k);
  const auto pushed = detail::atoms_at(ens, paths, base, shifted_offsets, metric);

  // translation through the view
  const EnsembleWindow view =
      translate(ens, k, static_cast<std::size_t>(base + offsets.front()), static_cast<std::size_t>(offsets.back() - offsets.front() + 1));
  const auto stride = static_cast<std::size_t>(offsets[1 % offsets.size()] - offsets[0]);
  std::vector<double> coords;
  for (std::size_t m : paths)
    for (std::size_t i = 0; i < offsets.size(); ++i)
      for (std::size_t c = 0; c < ens.dim(); ++c) coords.push_back(view(m, i * std::max<std::size_t>(stride, 1), c));
  const auto translated = EmpiricalMeasure::uniform(offsets.size() * ens.dim(), std::move(coords), metric);

  ConsistencyReport rep;
  rep.t = t;
  rep.atoms_identical = translated.coords() == pushed.coords();
  rep.d_bl = bl_distance(translated, pushed).value;
  if (!rep.pass()) throw InternalError("translation and index-shift disagree at t=" + std::to_string(t));
  return rep;
}

struct PaaReport {
  double p = 2.0;
  std::vector<double> z_moment;   // (E||Z(t)||^p)^{1/p} or E min(||Z||, 1) per grid point
  ErgodicMeanCurve ergodic;       // ergodic means of z_moment under mu
  DistributionCurve y_onedim;
  DistributionCurve y_path;
  std::optional<UIProfile> y_ui;

  /// Last ergodic value relative to the first.
  double decay_ratio() const {
    return ergodic.values.front() > 0.0 ? ergodic.values.back() / ergodic.values.front() : 0.0;
  }
  nlohmann::json to_json() const {
    nlohmann::json j{{"p", p}, {"ergodic", ergodic.to_json()}, {"decay_ratio", decay_ratio()},
                     {"y_onedim", y_onedim.to_json()}, {"y_path", y_path.to_json()}};
    if (y_ui) j["y_ui"] = y_ui->to_json();
    return j;
  }
};

struct PaaOptions {
  std::vector<double> base_times{0.0};
  PathWindow window{};
  std::vector<double> ui_cutoffs{0.5, 1.0, 2.0, 4.0};
  std::size_t ui_time_stride = 10;  // grid points between UI marginals
  DiagnosticOptions diag{};
};

/// Z = X - Y pathwise; Z's moment curve is averaged under mu, Y's laws are
/// compared along `shifts`.
inline PaaReport paa_p_distribution_check(const PathEnsemble& x, const PathEnsemble& y, double p, const WeightMeasure& mu,
                                          const std::vector<double>& radii, const std::vector<double>& shifts,
                                          const PaaOptions& opt = {}) {
  if (!x.same_shape(y)) throw ShapeMismatch("paa check: X and Y differ in grid, dim or path count");
  if (!(p >= 0.0)) throw InvalidArgument("paa check: p must be >= 0");
  const TimeGrid& g = x.grid();
  if (radii.empty() || -radii.back() < g.t0 - 1e-9 || radii.back() > g.end() + 1e-9)
    throw OutOfRange("paa check: radii exceed the ensemble grid");

  PaaReport rep;
  rep.p = p;
  rep.z_moment.assign(g.points(), 0.0);
  parallel::for_each_index(g.points(), [&](std::size_t j) {
    CompensatedSum s;
    for (std::size_t m = 0; m < x.paths(); ++m) {
      double sq = 0.0;
      for (std::size_t c = 0; c < x.dim(); ++c) {
        const double dz = x.at(m, j, c) - y.at(m, j, c);
        sq += dz * dz;
      }
      const double nz = std::sqrt(sq);
      s.add(p > 0.0 ? std::pow(nz, p) : std::min(nz, 1.0));
    }
    const double mean = s.value() / static_cast<double>(x.paths());
    rep.z_moment[j] = p > 0.0 ? std::pow(mean, 1.0 / p) : mean;
  });
  rep.ergodic = ergodic_mean(SampledFunction::from_grid(GridSamples{g.t0, g.h, rep.z_moment}, "Z-moment"), mu, radii, false);
  rep.y_onedim = onedim_distribution_curve(y, opt.base_times, shifts, opt.diag);
  rep.y_path = path_distribution_curve(y, opt.base_times, opt.window, shifts, opt.diag);
  if (p > 0.0) {
    std::vector<std::vector<double>> norms;
    for (std::size_t j = 0; j < g.points(); j += std::max<std::size_t>(opt.ui_time_stride, 1)) {
      std::vector<double> col(y.paths());
      for (std::size_t m = 0; m < y.paths(); ++m) {
        double sq = 0.0;
        for (std::size_t c = 0; c < y.dim(); ++c) sq += y.at(m, j, c) * y.at(m, j, c);
        col[m] = std::sqrt(sq);
      }
      norms.push_back(std::move(col));
    }
    rep.y_ui = uniform_integrability_profile(norms, p, opt.ui_cutoffs);
    rep.y_path.ui = rep.y_ui;
  }
  return rep;
}

}  // namespace aalab
