#pragma once

// Adaptive Gauss-Kronrod (7/15) quadrature on composite panels. Every
// integral in the library goes through here so that ratios of integrals
// (ergodic means, Condition (H) probes) share one discretization.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <span>
#include <vector>

#include "aalab/core/error.hpp"

namespace aalab {

struct QuadratureOptions {
  double abs_tol_per_unit = 1e-9;
  /// Floor for the tolerance on large integrands; the absolute target alone
  /// is below the rounding noise once |integral| exceeds ~1e6.
  double rel_tol = 1e-13;
  std::size_t max_intervals = 200;  // per panel
  double panel_width = 1.0;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gauss_kronrod_15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (std::size_t i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[i] * pair;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * pair;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Globally adaptive bisection on [a, b] until the summed error estimate
/// drops below `tol`, or `max_intervals` subintervals exist.
template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, double tol,
                                    double rel_tol, std::size_t max_intervals) {
  if (a == b) return {};
  std::priority_queue<detail::Segment> heap;
  heap.push(detail::gauss_kronrod_15(f, a, b));
  double total = heap.top().value;
  double error = heap.top().error;
  while (error > std::max(tol, rel_tol * std::abs(total)) && heap.size() < max_intervals) {
    const detail::Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const auto left = detail::gauss_kronrod_15(f, worst.a, mid);
    const auto right = detail::gauss_kronrod_15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum the leaves; the running total accumulates cancellation error.
  CompensatedSum sum, err;
  const bool converged = error <= std::max(tol, rel_tol * std::abs(total));
  while (!heap.empty()) {
    sum.add(heap.top().value);
    err.add(heap.top().error);
    heap.pop();
  }
  return {sum.value(), err.value(), converged};
}

/// Composite integration over [a, b] split into equal panels no wider than
/// opts.panel_width, each refined adaptively.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureOptions& opts = {}) {
  if (!(std::isfinite(a) && std::isfinite(b)))
    throw InvalidArgument("integrate: non-finite bounds");
  if (a == b) return {};
  const double sign = b > a ? 1.0 : -1.0;
  const double lo = std::min(a, b), hi = std::max(a, b);
  const auto panels = static_cast<std::size_t>(
      std::max(1.0, std::ceil((hi - lo) / opts.panel_width - 1e-9)));
  const double width = (hi - lo) / static_cast<double>(panels);
  CompensatedSum sum, err;
  bool converged = true;
  for (std::size_t k = 0; k < panels; ++k) {
    const double pa = lo + width * static_cast<double>(k);
    const double pb = (k + 1 == panels) ? hi : lo + width * static_cast<double>(k + 1);
    const auto r = integrate_adaptive(f, pa, pb, opts.abs_tol_per_unit * (pb - pa),
                                      opts.rel_tol, opts.max_intervals);
    sum.add(r.value);
    err.add(r.error);
    converged = converged && r.converged;
  }
  return {sign * sum.value(), err.value(), converged};
}

/// Composite integration with panels given by sorted breakpoints
/// (e.g. the knots of a piecewise-linear function).
template <class F>
QuadratureResult integrate_panels(F&& f, std::span<const double> breaks,
                                  const QuadratureOptions& opts = {}) {
  CompensatedSum sum, err;
  bool converged = true;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double pa = breaks[k], pb = breaks[k + 1];
    if (!(pb > pa)) continue;
    const auto r = integrate_adaptive(f, pa, pb, opts.abs_tol_per_unit * (pb - pa),
                                      opts.rel_tol, opts.max_intervals);
    sum.add(r.value);
    err.add(r.error);
    converged = converged && r.converged;
  }
  return {sum.value(), err.value(), converged};
}

}  // namespace aalab
