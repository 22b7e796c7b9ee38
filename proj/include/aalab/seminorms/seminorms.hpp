#pragma once

// Stepanov, weighted Stepanov, Weyl and Besicovitch seminorms of a
// deterministic function, evaluated on finite scans:
//   Stepanov     sup over a t-grid of the unit-window L^p norm (a lower
//                bound of the true sup);
//   Weyl         for each r of a ladder, sup over an x-grid of the p-mean on
//                [x - r, x + r]; the last ladder value is reported;
//   Besicovitch  p-mean on [-r, r]; limsup approximated by the max over the
//                last half of the ladder.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "aalab/core/error.hpp"
#include "aalab/core/parallel.hpp"
#include "aalab/core/quadrature.hpp"
#include "aalab/core/sampled_function.hpp"
#include "aalab/measures/weight_measure.hpp"

namespace aalab {

class SeminormKind {
 public:
  enum class Type { kStepanov, kStepanovWeighted, kWeyl, kBesicovitch };

  static SeminormKind stepanov(double p) { return {Type::kStepanov, p, std::nullopt}; }
  /// `nu` is a measure on [0, 1] with 0 < nu([0, 1]) < infinity.
  static SeminormKind stepanov_weighted(double p, WeightMeasure nu) {
    const double m = mass_between(nu, 0.0, 1.0);
    if (!(m > 0.0) || !std::isfinite(m)) throw InvalidMeasure("weighted Stepanov: need 0 < nu([0,1]) < inf");
    return {Type::kStepanovWeighted, p, std::move(nu)};
  }
  static SeminormKind weyl(double p) { return {Type::kWeyl, p, std::nullopt}; }
  static SeminormKind besicovitch(double p) { return {Type::kBesicovitch, p, std::nullopt}; }

  Type type() const { return type_; }
  double p() const { return p_; }
  const std::optional<WeightMeasure>& nu() const { return nu_; }

  std::string name() const {
    switch (type_) {
      case Type::kStepanov: return "stepanov";
      case Type::kStepanovWeighted: return "stepanov_weighted";
      case Type::kWeyl: return "weyl";
      case Type::kBesicovitch: return "besicovitch";
    }
    return "?";
  }

 private:
  SeminormKind(Type t, double p, std::optional<WeightMeasure> nu) : type_(t), p_(p), nu_(std::move(nu)) {
    if (!(p > 0.0) || !std::isfinite(p)) throw InvalidArgument("seminorm exponent p must be positive");
  }
  Type type_;
  double p_;
  std::optional<WeightMeasure> nu_;
};

struct SeminormScan {
  double t_lo = -1e3;
  double t_hi = 1e3;
  double t_step = 0.25;
  std::vector<double> ladder{10, 100, 1e3, 1e4, 1e5, 2e5, 4e5};
  /// Absolute tolerance between the last two ladder values.
  double ladder_tol = 5e-3;
  QuadratureOptions quad{};
};

struct SeminormResult {
  std::string kind;
  double p = 0.0;
  double value = 0.0;
  bool converged = true;
  std::vector<std::pair<double, double>> trace;  // (r, estimate)

  nlohmann::json to_json() const {
    nlohmann::json tr = nlohmann::json::array();
    for (const auto& [r, v] : trace) tr.push_back({r, v});
    return {{"kind", kind}, {"p", p}, {"value", value}, {"converged", converged}, {"trace", tr}};
  }
};

namespace detail {

inline double abs_pow(double v, double p) {
  const double a = std::abs(v);
  if (p == 1.0) return a;
  if (p == 2.0) return a * a;
  return std::pow(a, p);
}

inline double root(double v, double p) {
  if (v <= 0.0) return 0.0;
  if (p == 1.0) return v;
  if (p == 2.0) return std::sqrt(v);
  return std::pow(v, 1.0 / p);
}

/// Cumulative integral of |h|^p on the nodes lo + k*w.
class PrefixIntegral {
 public:
  PrefixIntegral(const SampledFunction& h, double p, double lo, double hi, double w, const QuadratureOptions& opts)
      : h_(h), p_(p), lo_(lo), w_(w), opts_(opts) {
    const auto panels = static_cast<std::size_t>(std::ceil((hi - lo) / w - 1e-9));
    std::vector<double> pieces(panels);
    parallel::for_each_index(panels, [&](std::size_t k) {
      const double a = lo + w * static_cast<double>(k);
      pieces[k] = panel(a, a + w);
    });
    cum_.assign(panels + 1, 0.0);
    CompensatedSum s;
    for (std::size_t k = 0; k < panels; ++k) {
      s.add(pieces[k]);
      cum_[k + 1] = s.value();
      if (!std::isfinite(cum_[k + 1]))
        throw InvalidArgument("seminorm: the integral of |h|^p is not finite up to t=" +
                              std::to_string(lo + w * static_cast<double>(k + 1)));
    }
  }

  double integral(double a, double b) const { return at(b) - at(a); }

 private:
  double panel(double a, double b) const {
    auto f = [&](double t) { return abs_pow(h_(t), p_); };
    const auto br = h_.breakpoints(a, b);
    if (br.size() > 2) return integrate_panels(f, br, opts_).value;
    return integrate_adaptive(f, a, b, opts_.abs_tol_per_unit * (b - a), opts_.rel_tol, opts_.max_intervals).value;
  }

  // Integral from lo to x; off-node points add a partial panel.
  double at(double x) const {
    const double u = (x - lo_) / w_;
    const double k = std::round(u);
    if (u < -1e-9 || u > static_cast<double>(cum_.size() - 1) + 1e-9)
      throw OutOfRange("seminorm scan reaches t=" + std::to_string(x) + " outside the prepared range");
    if (std::abs(u - k) < 1e-9) return cum_[static_cast<std::size_t>(k)];
    const auto j = static_cast<std::size_t>(std::floor(u));
    const double node = lo_ + w_ * static_cast<double>(j);
    return cum_[j] + panel(node, x);
  }

  const SampledFunction& h_;
  double p_, lo_, w_;
  QuadratureOptions opts_;
  std::vector<double> cum_;
};

inline std::vector<double> scan_grid(const SeminormScan& s) {
  if (!(s.t_step > 0.0) || !(s.t_hi >= s.t_lo)) throw InvalidArgument("seminorm scan: invalid t-grid");
  const auto n = static_cast<std::size_t>(std::floor((s.t_hi - s.t_lo) / s.t_step + 1e-9));
  std::vector<double> out(n + 1);
  for (std::size_t i = 0; i <= n; ++i) out[i] = s.t_lo + s.t_step * static_cast<double>(i);
  return out;
}

inline void check_ladder(const std::vector<double>& ladder) {
  if (ladder.size() < 2) throw InvalidArgument("seminorm ladder needs at least two radii");
  for (std::size_t i = 0; i < ladder.size(); ++i)
    if (!(ladder[i] > 0.0) || (i > 0 && !(ladder[i] > ladder[i - 1])))
      throw InvalidArgument("seminorm ladder must be positive and increasing");
}

}  // namespace detail

/// Unit-window L^p norm (integral over [t, t+1] of |h|^p)^(1/p); with `nu`
/// the Lebesgue measure on the window is replaced by d nu(s - t).
inline double stepanov_local(const SampledFunction& h, double t, double p,
                             const std::optional<WeightMeasure>& nu = std::nullopt,
                             const QuadratureOptions& opts = {}) {
  if (!(p > 0.0)) throw InvalidArgument("stepanov_local: p must be positive");
  auto f = [&](double s) {
    const double w = nu ? nu->density(s) : 1.0;
    return detail::abs_pow(h(t + s), p) * w;
  };
  const double v = integrate(f, 0.0, 1.0, opts).value;
  if (!std::isfinite(v)) throw InvalidArgument("stepanov_local: non-finite integral at t=" + std::to_string(t));
  return detail::root(v, p);
}

inline SeminormResult seminorm(const SampledFunction& h, const SeminormKind& kind, const SeminormScan& scan = {}) {
  SeminormResult res;
  res.kind = kind.name();
  res.p = kind.p();
  const double p = kind.p();
  const auto grid = detail::scan_grid(scan);

  if (kind.type() == SeminormKind::Type::kStepanovWeighted) {
    std::vector<double> local(grid.size());
    parallel::for_each_index(grid.size(), [&](std::size_t i) {
      local[i] = stepanov_local(h, grid[i], p, kind.nu(), scan.quad);
    });
    res.value = *std::max_element(local.begin(), local.end());
    return res;
  }

  if (kind.type() == SeminormKind::Type::kStepanov) {
    const detail::PrefixIntegral table(h, p, scan.t_lo, scan.t_hi + 1.0, scan.t_step, scan.quad);
    double best = 0.0;
    for (double t : grid) best = std::max(best, table.integral(t, t + 1.0));
    res.value = detail::root(best, p);
    return res;
  }

  detail::check_ladder(scan.ladder);
  const double rmax = scan.ladder.back();
  if (kind.type() == SeminormKind::Type::kBesicovitch) {
    const detail::PrefixIntegral table(h, p, -rmax, rmax, scan.t_step, scan.quad);
    for (double r : scan.ladder) res.trace.emplace_back(r, detail::root(table.integral(-r, r) / (2.0 * r), p));
  } else {
    const detail::PrefixIntegral table(h, p, scan.t_lo - rmax, scan.t_hi + rmax, scan.t_step, scan.quad);
    for (double r : scan.ladder) {
      double best = 0.0;
      for (double x : grid) best = std::max(best, table.integral(x - r, x + r));
      res.trace.emplace_back(r, detail::root(best / (2.0 * r), p));
    }
  }
  const std::size_t n = res.trace.size();
  const double last = res.trace[n - 1].second;
  const double prev = res.trace[n - 2].second;
  res.converged = std::abs(last - prev) < scan.ladder_tol;
  if (kind.type() == SeminormKind::Type::kWeyl) {
    res.value = last;
  } else {
    res.value = 0.0;
    for (std::size_t i = n - n / 2; i < n; ++i) res.value = std::max(res.value, res.trace[i].second);
  }
  return res;
}

struct SeminormOrdering {
  double stepanov = 0.0;
  double weyl = 0.0;
  double besicovitch = 0.0;
  double tolerance = 0.0;
  bool stepanov_ge_weyl = false;
  bool weyl_ge_besicovitch = false;
  bool pass() const { return stepanov_ge_weyl && weyl_ge_besicovitch; }
  nlohmann::json to_json() const {
    return {{"stepanov", stepanov}, {"weyl", weyl}, {"besicovitch", besicovitch}, {"tolerance", tolerance},
            {"stepanov_ge_weyl", stepanov_ge_weyl}, {"weyl_ge_besicovitch", weyl_ge_besicovitch}};
  }
};

/// S^p >= W^p, and the Weyl window at each radius dominates the centered
/// Besicovitch window at the same radius, up to the ladder tolerance.
inline SeminormOrdering seminorm_ordering_check(const SampledFunction& h, double p, const SeminormScan& scan = {}) {
  SeminormOrdering out;
  const auto w = seminorm(h, SeminormKind::weyl(p), scan);
  const auto b = seminorm(h, SeminormKind::besicovitch(p), scan);
  out.stepanov = seminorm(h, SeminormKind::stepanov(p), scan).value;
  out.weyl = w.value;
  out.besicovitch = b.value;
  out.tolerance = scan.ladder_tol;
  out.stepanov_ge_weyl = out.stepanov >= out.weyl - out.tolerance;
  out.weyl_ge_besicovitch = true;
  for (std::size_t i = 0; i < w.trace.size(); ++i)
    if (w.trace[i].second < b.trace[i].second - out.tolerance) out.weyl_ge_besicovitch = false;
  return out;
}

}  // namespace aalab
