#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aalab/core/error.hpp"
#include "aalab/core/quadrature.hpp"
#include "aalab/core/sampled_function.hpp"
#include "aalab/measures/weight_measure.hpp"

namespace aalab {

struct ErgodicMeanCurve {
  std::vector<double> radii;
  std::vector<double> values;
  bool truncated = false;  // integrand was |f| ^ 1

  double last() const { return values.empty() ? 0.0 : values.back(); }

  void write_csv(std::ostream& os) const {
    os << "r,value\n";
    for (std::size_t i = 0; i < radii.size(); ++i)
      os << detail::fmt_num(radii[i]) << ',' << detail::fmt_num(values[i]) << '\n';
  }

  nlohmann::json to_json() const { return {{"radii", radii}, {"values", values}, {"truncated", truncated}}; }
};

namespace detail {
inline void check_radii(const std::vector<double>& radii) {
  if (radii.empty()) throw InvalidArgument("radii must be non-empty");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || !std::isfinite(radii[i])) throw InvalidArgument("radii must be positive and finite");
    if (i > 0 && !(radii[i] > radii[i - 1])) throw InvalidArgument("radii must be strictly increasing");
  }
}
}  // namespace detail

/// (1 / mu([-r, r])) * integral over [-r, r] of |f| dmu, for each r.
/// Radii are processed shell by shell so every prefix shares quadrature.
inline ErgodicMeanCurve ergodic_mean(const SampledFunction& f, const WeightMeasure& mu,
                                     const std::vector<double>& radii, bool clip,
                                     const QuadratureOptions& opts = {}) {
  detail::check_radii(radii);
  auto integrand = [&](double t) {
    const double v = std::abs(f(t));
    return clip ? std::min(v, 1.0) : v;
  };
  auto one = [](double) { return 1.0; };
  ErgodicMeanCurve out;
  out.truncated = clip;
  CompensatedSum num, den;
  double prev = 0.0;
  for (double r : radii) {
    auto shell = [&](auto&& g, double a, double b) {
      return detail::weighted_integral(g, mu, a, b, f.breakpoints(a, b), opts);
    };
    if (prev == 0.0) {
      num.add(shell(integrand, -r, r));
      den.add(shell(one, -r, r));
    } else {
      num.add(shell(integrand, -r, -prev));
      num.add(shell(integrand, prev, r));
      den.add(shell(one, -r, -prev));
      den.add(shell(one, prev, r));
    }
    prev = r;
    if (!(den.value() > 0.0)) throw InvalidMeasure("measure '" + mu.label() + "' has zero mass on [-r, r]");
    out.radii.push_back(r);
    out.values.push_back(std::max(0.0, num.value()) / den.value());
  }
  return out;
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool intersects(const Interval& o) const { return lo < o.hi && o.lo < hi; }
};

/// A Borel test set: a finite union of intervals.
using ProbeSet = std::vector<Interval>;

struct ConditionHReport {
  struct ShiftResult {
    double tau = 0.0;
    double ratio = 0.0;  // sup over accepted probes of mu(A + tau) / mu(A)
    bool pass = false;   // ratio finite
  };
  Interval central;
  std::vector<ShiftResult> shifts;
  std::vector<std::string> notices;  // rejected probes
  /// Probing can refute (H) but never establish it.
  std::string verdict() const {
    for (const auto& s : shifts)
      if (!s.pass) return "refuted on probes";
    return "not refuted on probes";
  }
  nlohmann::json to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& s : shifts) rows.push_back({{"tau", s.tau}, {"ratio", s.ratio}, {"pass", s.pass}});
    return {{"central", {central.lo, central.hi}}, {"shifts", rows}, {"notices", notices}, {"verdict", verdict()},
            {"note", "necessary-condition check on finitely many probe sets; passing does not prove (H)"}};
  }
};

/// Necessary-condition probe of Condition (H): mu(A + tau) <= beta * mu(A)
/// for test sets A avoiding the central interval.
inline ConditionHReport check_condition_H(const WeightMeasure& mu, const std::vector<double>& taus,
                                          const std::vector<ProbeSet>& probes, Interval central = {-1.0, 1.0},
                                          const QuadratureOptions& opts = {}) {
  ConditionHReport rep;
  rep.central = central;
  std::vector<const ProbeSet*> accepted;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    bool ok = !probes[p].empty();
    for (const auto& iv : probes[p]) {
      if (!(iv.hi > iv.lo)) ok = false;
      if (iv.intersects(central)) ok = false;
    }
    if (ok)
      accepted.push_back(&probes[p]);
    else
      rep.notices.push_back("probe " + std::to_string(p) + " rejected: empty, degenerate or intersects central interval");
  }
  auto measure_of = [&](const ProbeSet& set, double shift) {
    CompensatedSum s;
    for (const auto& iv : set) s.add(mass_between(mu, iv.lo + shift, iv.hi + shift, opts));
    return s.value();
  };
  for (double tau : taus) {
    ConditionHReport::ShiftResult row{tau, 0.0, true};
    for (const ProbeSet* set : accepted) {
      const double base = measure_of(*set, 0.0);
      const double moved = measure_of(*set, tau);
      const double ratio = base > 0.0 ? moved / base : (moved > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
      row.ratio = std::max(row.ratio, ratio);
    }
    row.pass = std::isfinite(row.ratio);
    rep.shifts.push_back(row);
  }
  return rep;
}

struct RPlusReport {
  std::vector<double> radii;
  std::vector<double> ratios;  // mu([0, r]) / mu([-r, r])
  double minimum = 0.0;
  double floor = 0.0;
  bool pass = false;
  nlohmann::json to_json() const {
    return {{"radii", radii}, {"ratios", ratios}, {"minimum", minimum}, {"floor", floor}, {"pass", pass}};
  }
};

/// Finite-radius probe of liminf mu([0, r]) / mu([-r, r]) > 0.
inline RPlusReport check_R_plus(const WeightMeasure& mu, const std::vector<double>& radii, double floor = 0.05,
                                const QuadratureOptions& opts = {}) {
  detail::check_radii(radii);
  RPlusReport rep;
  rep.floor = floor;
  rep.minimum = std::numeric_limits<double>::infinity();
  for (double r : radii) {
    const double right = mass_between(mu, 0.0, r, opts);
    const double left = mass_between(mu, -r, 0.0, opts);
    const double ratio = right / (left + right);
    rep.radii.push_back(r);
    rep.ratios.push_back(ratio);
    rep.minimum = std::min(rep.minimum, ratio);
  }
  rep.pass = rep.minimum > floor;
  return rep;
}

struct MeasureValidation {
  std::vector<double> radii;
  std::vector<double> masses;
  bool finite_and_increasing = true;
  bool exceeds_bound = false;
  bool pass() const { return finite_and_increasing && exceeds_bound; }
};

/// Numeric probe of mu(R) = infinity with mu finite on bounded intervals:
/// masses at the probe radii must be finite, strictly increasing and end
/// above `bound`.
inline MeasureValidation validate_measure(const WeightMeasure& mu, std::vector<double> radii = {1e2, 1e3, 1e4},
                                          double bound = 100.0, const QuadratureOptions& opts = {}) {
  detail::check_radii(radii);
  MeasureValidation v;
  v.radii = radii;
  for (double r : radii) {
    const double m = mass(mu, r, opts);
    if (!std::isfinite(m) || (!v.masses.empty() && !(m > v.masses.back()))) v.finite_and_increasing = false;
    v.masses.push_back(m);
  }
  v.exceeds_bound = v.masses.back() > bound;
  return v;
}

struct VanishingSequence {
  std::vector<double> times;
  std::vector<double> values;      // |f| at those times
  std::vector<double> tolerances;  // tol_k = tol0 * 10^-k
  bool complete = false;
  std::vector<std::string> diagnostics;
};

struct VanishingOptions {
  double tol0 = 0.1;
  double scan_step = 0.01;
};

/// Scans [0, horizon] forward for times t_1 < t_2 < ... where |f| falls
/// below a geometric tolerance schedule with non-increasing values.
inline VanishingSequence find_vanishing_sequence(const SampledFunction& f, const WeightMeasure& mu, double horizon,
                                                 std::size_t count, const VanishingOptions& opt = {},
                                                 const QuadratureOptions& qopts = {}) {
  if (!(horizon > 0.0) || !(opt.scan_step > 0.0) || !(opt.tol0 > 0.0))
    throw InvalidArgument("find_vanishing_sequence: horizon, scan_step and tol0 must be positive");
  VanishingSequence out;
  const std::vector<double> probe{horizon / 100.0, horizon / 10.0, horizon};
  const auto curve = ergodic_mean(f, mu, probe, false, qopts);
  for (std::size_t i = 1; i < curve.values.size(); ++i)
    if (curve.values[i] > curve.values[i - 1] * (1.0 + 1e-12))
      out.diagnostics.push_back("warning: ergodic mean does not decay between r=" + detail::fmt_num(probe[i - 1]) +
                                " and r=" + detail::fmt_num(probe[i]));
  const auto steps = static_cast<std::size_t>(std::floor(horizon / opt.scan_step + 1e-9));
  double tol = opt.tol0;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j <= steps && out.times.size() < count; ++j) {
    const double t = opt.scan_step * static_cast<double>(j);
    const double v = std::abs(f(t));
    if (v < tol && v <= previous) {
      out.times.push_back(t);
      out.values.push_back(v);
      out.tolerances.push_back(tol);
      previous = v;
      tol *= 0.1;
    }
  }
  out.complete = out.times.size() == count;
  if (!out.complete)
    out.diagnostics.push_back("horizon exhausted after " + std::to_string(out.times.size()) + " of " +
                              std::to_string(count) + " times");
  return out;
}

}  // namespace aalab
