#pragma once

// Finite proxies for almost periodicity, almost automorphy (Bochner double
// sequences), compact almost automorphy and wide-sense mu-PAA. Every AA test
// takes one candidate shift sequence; numerics can refute or corroborate,
// never certify.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "aalab/core/error.hpp"
#include "aalab/core/expr.hpp"
#include "aalab/core/parallel.hpp"
#include "aalab/core/sampled_function.hpp"
#include "aalab/measures/ergodic.hpp"

namespace aalab {

using FunctionSpec = Expr;

struct Window {
  double lo = -10.0;
  double hi = 10.0;
};

struct RecurrenceReport {
  static constexpr std::size_t kWitnessCap = 100;
  static constexpr const char* kHeader =
      "finite numerical proxy on one candidate shift family; consistent-with is not a proof";

  std::string test;
  nlohmann::json parameters = nlohmann::json::object();
  std::string verdict = "consistent-with";  // or "refutes"
  std::vector<nlohmann::json> witnesses;
  std::size_t witness_count = 0;

  std::vector<double> shifts;    // almost periods found
  double max_gap = 0.0;
  double pointwise_modulus = 0.0;  // sup_t of tail oscillation
  double return_modulus = 0.0;
  std::vector<double> uniform_moduli;  // sup_t |f(t+s_n) - f(t+s_{n+1})|
  double uniform_modulus = 0.0;        // over the tail

  bool refutes() const { return verdict == "refutes"; }

  void add_witness(nlohmann::json w) {
    ++witness_count;
    if (witnesses.size() < kWitnessCap) witnesses.push_back(std::move(w));
  }

  nlohmann::json to_json() const {
    nlohmann::json j{{"test", test},         {"header", kHeader},
                     {"parameters", parameters}, {"verdict", verdict},
                     {"witnesses", witnesses}, {"witness_count", witness_count}};
    if (test == "almost_period_scan") {
      const std::size_t n = std::min(shifts.size(), kWitnessCap);
      j["shifts"] = std::vector<double>(shifts.begin(), shifts.begin() + static_cast<std::ptrdiff_t>(n));
      j["shift_count"] = shifts.size();
      j["max_gap"] = max_gap;
    } else {
      j["pointwise_modulus"] = pointwise_modulus;
      j["return_modulus"] = return_modulus;
      j["uniform_moduli"] = uniform_moduli;
      j["uniform_modulus"] = uniform_modulus;
    }
    return j;
  }
};

namespace detail {

inline std::vector<double> window_grid(const Window& w, double step) {
  if (!(step > 0.0) || !(w.hi >= w.lo) || !std::isfinite(w.lo) || !std::isfinite(w.hi))
    throw InvalidArgument("window grid needs a finite window and a positive step");
  const auto n = static_cast<std::size_t>(std::floor((w.hi - w.lo) / step + 1e-9));
  std::vector<double> out(n + 1);
  for (std::size_t i = 0; i <= n; ++i) out[i] = w.lo + step * static_cast<double>(i);
  return out;
}

inline void check_shift_family(const std::vector<double>& shifts) {
  if (shifts.size() < 4) throw InvalidArgument("AA tests need at least 4 shifts");
  for (double s : shifts)
    if (!std::isfinite(s)) throw InvalidArgument("shifts must be finite");
}

constexpr std::size_t kTail = 3;

}  // namespace detail

/// Shifts tau = k * shift_step in [0, L] with sup over the window grid of
/// |f(t + tau) - f(t)| <= epsilon. Verdict consistent-with AP at (epsilon,
/// ell) when every length-ell subinterval of [0, L] contains a found shift;
/// ell defaults to L / 10.
inline RecurrenceReport almost_period_scan(const SampledFunction& f, double epsilon, Window window, double L,
                                           double shift_step, double ell = 0.0, double grid_step = 0.01) {
  if (!(epsilon > 0.0)) throw InvalidArgument("almost_period_scan: epsilon must be positive");
  if (!(L >= 0.0) || !std::isfinite(L) || !(shift_step > 0.0))
    throw InvalidArgument("almost_period_scan: empty shift grid");
  if (ell <= 0.0) ell = L / 10.0;
  const auto grid = detail::window_grid(window, grid_step);
  const auto count = static_cast<std::size_t>(std::floor(L / shift_step + 1e-9)) + 1;

  std::vector<double> base(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) base[i] = f(grid[i]);
  std::vector<char> ok(count, 0);
  parallel::for_each_index(count, [&](std::size_t k) {
    const double tau = shift_step * static_cast<double>(k);
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (!(std::abs(f(grid[i] + tau) - base[i]) <= epsilon)) return;
    ok[k] = 1;
  });

  RecurrenceReport rep;
  rep.test = "almost_period_scan";
  rep.parameters = {{"epsilon", epsilon}, {"window", {window.lo, window.hi}}, {"L", L},
                    {"shift_step", shift_step}, {"ell", ell}, {"grid_step", grid_step}};
  for (std::size_t k = 0; k < count; ++k)
    if (ok[k]) rep.shifts.push_back(shift_step * static_cast<double>(k));

  // Gaps between consecutive found shifts, plus the stretches from 0 to the
  // first and from the last to L.
  auto gap = [&](double a, double b) {
    rep.max_gap = std::max(rep.max_gap, b - a);
    if (b - a > ell + 1e-12) rep.add_witness({{"gap_from", a}, {"gap_to", b}, {"length", b - a}});
  };
  double prev = 0.0;
  for (double s : rep.shifts) {
    gap(prev, s);
    prev = s;
  }
  gap(prev, L);
  rep.verdict = rep.witness_count > 0 ? "refutes" : "consistent-with";
  return rep;
}

/// Bochner double-sequence proxy: the tail of f(t + s_n) must be Cauchy at
/// every window grid point, and the limit g = f(. + s_m) must return,
/// sup_t |g(t - s_n) - f(t)| <= tol, for tail pairs n < m.
inline RecurrenceReport aa_double_shift_test(const SampledFunction& f, const std::vector<double>& shifts,
                                             Window window = {}, double grid_step = 0.01, double tol = 0.05) {
  detail::check_shift_family(shifts);
  if (!(tol > 0.0)) throw InvalidArgument("tol must be positive");
  const auto grid = detail::window_grid(window, grid_step);
  const std::size_t N = shifts.size();
  const std::size_t first = N - detail::kTail;

  RecurrenceReport rep;
  rep.test = "aa_double_shift_test";
  rep.parameters = {{"shifts", shifts}, {"window", {window.lo, window.hi}}, {"grid_step", grid_step}, {"tol", tol}};

  std::vector<double> osc(grid.size());
  parallel::for_each_index(grid.size(), [&](std::size_t i) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t n = first; n < N; ++n) {
      const double v = f(grid[i] + shifts[n]);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    osc[i] = hi - lo;
  });
  for (std::size_t i = 0; i < grid.size(); ++i) {
    rep.pointwise_modulus = std::max(rep.pointwise_modulus, osc[i]);
    if (!(osc[i] <= tol)) rep.add_witness({{"kind", "not-cauchy"}, {"t", grid[i]}, {"oscillation", osc[i]}});
  }

  for (std::size_t n = first; n < N; ++n) {
    for (std::size_t m = n + 1; m < N; ++m) {
      double worst = 0.0, at = grid.front();
      for (double t : grid) {
        const double d = std::abs(f(t - shifts[n] + shifts[m]) - f(t));
        if (!(d <= worst)) worst = d, at = t;
      }
      rep.return_modulus = std::max(rep.return_modulus, worst);
      if (!(worst <= tol))
        rep.add_witness({{"kind", "no-return"}, {"shift", shifts[n]}, {"limit_shift", shifts[m]}, {"t", at},
                         {"deviation", worst}});
    }
  }
  rep.verdict = rep.witness_count > 0 ? "refutes" : "consistent-with";
  return rep;
}

/// Uniform variant: Cauchy criterion on the window-sup modulus
/// u_n = sup_t |f(t + s_n) - f(t + s_{n+1})| over the tail, and the return
/// criterion on every ordered tail pair.
inline RecurrenceReport compact_aa_uniformity(const SampledFunction& f, const std::vector<double>& shifts,
                                              Window window = {}, double grid_step = 0.01, double tol = 0.05) {
  detail::check_shift_family(shifts);
  if (!(tol > 0.0)) throw InvalidArgument("tol must be positive");
  const auto grid = detail::window_grid(window, grid_step);
  const std::size_t N = shifts.size();
  const std::size_t first = N - detail::kTail;

  RecurrenceReport rep;
  rep.test = "compact_aa_uniformity";
  rep.parameters = {{"shifts", shifts}, {"window", {window.lo, window.hi}}, {"grid_step", grid_step}, {"tol", tol}};

  rep.uniform_moduli.assign(N - 1, 0.0);
  parallel::for_each_index(N - 1, [&](std::size_t n) {
    double u = 0.0;
    for (double t : grid) u = std::max(u, std::abs(f(t + shifts[n]) - f(t + shifts[n + 1])));
    rep.uniform_moduli[n] = u;
  });
  for (std::size_t n = first; n + 1 < N; ++n) {
    rep.uniform_modulus = std::max(rep.uniform_modulus, rep.uniform_moduli[n]);
    if (!(rep.uniform_moduli[n] <= tol))
      rep.add_witness({{"kind", "not-uniformly-cauchy"}, {"shift", shifts[n]}, {"next_shift", shifts[n + 1]},
                       {"modulus", rep.uniform_moduli[n]}});
  }
  for (std::size_t n = first; n < N; ++n) {
    for (std::size_t m = first; m < N; ++m) {
      if (m == n) continue;
      double worst = 0.0;
      for (double t : grid) worst = std::max(worst, std::abs(f(t - shifts[n] + shifts[m]) - f(t)));
      rep.return_modulus = std::max(rep.return_modulus, worst);
      if (!(worst <= tol))
        rep.add_witness({{"kind", "no-uniform-return"}, {"shift", shifts[n]}, {"limit_shift", shifts[m]},
                         {"deviation", worst}});
    }
  }
  rep.verdict = rep.witness_count > 0 ? "refutes" : "consistent-with";
  return rep;
}

/// Clipped mu-ergodic mean of |f - g|; decay toward 0 is consistent with
/// wide-sense mu-PAA with AA part g.
inline ErgodicMeanCurve paa_residual_test(const SampledFunction& f, const SampledFunction& g, const WeightMeasure& mu,
                                          const std::vector<double>& radii, const QuadratureOptions& opts = {}) {
  const SampledFunction residual("|f-g|", [f, g](double t) { return f(t) - g(t); });
  return ergodic_mean(residual, mu, radii, true, opts);
}

/// "refutes" unless the last curve value is at most `tol`.
inline std::string paa_residual_verdict(const ErgodicMeanCurve& curve, double tol = 0.05) {
  return curve.last() <= tol ? "consistent-with" : "refutes";
}

}  // namespace aalab
