#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aalab/core/error.hpp"
#include "aalab/core/expr.hpp"

namespace aalab {

/// Values on a uniform grid t0 + j*h, j = 0..size-1, linearly interpolated.
struct GridSamples {
  double t0 = 0.0;
  double h = 1.0;
  std::vector<double> values;

  double t_end() const { return t0 + h * static_cast<double>(values.size() - 1); }

  double operator()(double t) const {
    const double u = (t - t0) / h;
    const double last = static_cast<double>(values.size() - 1);
    if (u < -1e-9 || u > last + 1e-9)
      throw OutOfRange("grid function evaluated at t=" + std::to_string(t) + " outside [" +
                       std::to_string(t0) + ", " + std::to_string(t_end()) + "]");
    const double uc = std::clamp(u, 0.0, last);
    const auto j = static_cast<std::size_t>(std::min(std::floor(uc), std::max(0.0, last - 1.0)));
    if (values.size() == 1) return values[0];
    const double w = uc - static_cast<double>(j);
    return (1.0 - w) * values[j] + w * values[j + 1];
  }

  /// Knots lying in [a, b], with a and b included.
  std::vector<double> knots_within(double a, double b) const {
    std::vector<double> out{a};
    const auto first = static_cast<long long>(std::ceil((a - t0) / h + 1e-12));
    for (long long j = std::max(0LL, first); j < static_cast<long long>(values.size()); ++j) {
      const double t = t0 + h * static_cast<double>(j);
      if (t >= b) break;
      if (t > a) out.push_back(t);
    }
    out.push_back(b);
    return out;
  }
};

/// A deterministic real function of time: an expression, an arbitrary
/// callable, or grid samples.
class SampledFunction {
 public:
  SampledFunction() : SampledFunction(Expr::constant(0.0)) {}
  SampledFunction(Expr e)  // NOLINT(google-explicit-constructor)
      : label_(e.describe()), eval_([e](double t) { return e(t); }), expr_(std::make_shared<Expr>(std::move(e))) {}
  SampledFunction(std::string label, std::function<double(double)> fn)
      : label_(std::move(label)), eval_(std::move(fn)) {}

  static SampledFunction from_grid(GridSamples g, std::string label = "grid") {
    if (g.values.empty() || !(g.h > 0.0)) throw InvalidArgument("grid function needs samples and h > 0");
    auto shared = std::make_shared<const GridSamples>(std::move(g));
    SampledFunction f(std::move(label), [shared](double t) { return (*shared)(t); });
    f.grid_ = shared;
    return f;
  }

  double operator()(double t) const { return eval_(t); }
  const std::string& label() const { return label_; }
  const GridSamples* grid() const { return grid_.get(); }
  const Expr* expr() const { return expr_.get(); }

  /// Quadrature panel breakpoints for [a, b]: grid knots when grid-backed,
  /// otherwise empty (caller falls back to unit panels).
  std::vector<double> breakpoints(double a, double b) const {
    return grid_ ? grid_->knots_within(a, b) : std::vector<double>{};
  }

 private:
  std::string label_;
  std::function<double(double)> eval_;
  std::shared_ptr<const GridSamples> grid_;
  std::shared_ptr<const Expr> expr_;
};

}  // namespace aalab
