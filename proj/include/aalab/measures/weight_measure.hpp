#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "aalab/core/error.hpp"
#include "aalab/core/expr.hpp"
#include "aalab/core/quadrature.hpp"
#include "aalab/core/sampled_function.hpp"

namespace aalab {

/// A Borel measure on the real line given by a nonnegative density.
class WeightMeasure {
 public:
  static WeightMeasure lebesgue() {
    return WeightMeasure("lebesgue", {{"kind", "lebesgue"}}, [](double) { return 1.0; }, true);
  }
  /// density 1 + |t|^k
  static WeightMeasure polynomial(double k) {
    if (!(k >= 0.0)) throw InvalidArgument("polynomial measure needs k >= 0");
    return WeightMeasure("polynomial(" + detail::fmt_num(k) + ")", {{"kind", "polynomial"}, {"k", k}},
                         [k](double t) { return 1.0 + std::pow(std::abs(t), k); }, true);
  }
  /// density exp(-a|t|) + 1
  static WeightMeasure exp_window(double a) {
    if (!(a > 0.0)) throw InvalidArgument("exp_window measure needs a > 0");
    return WeightMeasure("exp_window(" + detail::fmt_num(a) + ")", {{"kind", "exp_window"}, {"a", a}},
                         [a](double t) { return std::exp(-a * std::abs(t)) + 1.0; }, true);
  }
  /// Arbitrary density. `infinite_mass` declares mu(R) = infinity.
  static WeightMeasure custom(std::string label, std::function<double(double)> density,
                              bool infinite_mass = false) {
    return WeightMeasure(std::move(label), {{"kind", "custom"}}, std::move(density), infinite_mass);
  }
  static WeightMeasure from_expr(const Expr& density, bool infinite_mass = false) {
    return WeightMeasure("custom(" + density.describe() + ")",
                         {{"kind", "custom"}, {"density", density.to_json()}, {"infinite_mass", infinite_mass}},
                         [density](double t) { return density(t); }, infinite_mass);
  }
  static WeightMeasure from_grid(GridSamples g) {
    nlohmann::json d{{"kind", "grid"}, {"t0", g.t0}, {"h", g.h}, {"values", g.values}};
    auto f = SampledFunction::from_grid(std::move(g), "grid density");
    WeightMeasure m("grid", std::move(d), [f](double t) { return f(t); }, false);
    m.grid_ = std::make_shared<SampledFunction>(f);
    return m;
  }

  static WeightMeasure from_json(const nlohmann::json& j);

  /// Density at t; throws InvalidMeasure on negative or non-finite samples.
  double density(double t) const {
    const double v = density_(t);
    if (!std::isfinite(v) || v < 0.0)
      throw InvalidMeasure("measure '" + label_ + "' has invalid density " + std::to_string(v) +
                           " at t=" + std::to_string(t));
    return v;
  }

  const std::string& label() const { return label_; }
  const nlohmann::json& descriptor() const { return descriptor_; }
  /// Catalog entries for which mu(R) = infinity is known.
  bool infinite_mass() const { return infinite_mass_; }
  std::vector<double> breakpoints(double a, double b) const {
    return grid_ ? grid_->breakpoints(a, b) : std::vector<double>{};
  }

 private:
  WeightMeasure(std::string label, nlohmann::json descriptor, std::function<double(double)> density,
                bool infinite_mass)
      : label_(std::move(label)), descriptor_(std::move(descriptor)), density_(std::move(density)),
        infinite_mass_(infinite_mass) {}

  std::string label_;
  nlohmann::json descriptor_;
  std::function<double(double)> density_;
  bool infinite_mass_ = false;
  std::shared_ptr<SampledFunction> grid_;
};

inline WeightMeasure WeightMeasure::from_json(const nlohmann::json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    for (const auto& [key, _] : j.items()) {
      static const std::vector<std::string> allowed{"kind", "k", "a", "density", "infinite_mass", "t0", "h", "values"};
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        throw ConfigError("measure: unknown key '" + key + "'");
    }
    if (kind == "lebesgue") return lebesgue();
    if (kind == "polynomial") return polynomial(j.at("k").get<double>());
    if (kind == "exp_window") return exp_window(j.at("a").get<double>());
    if (kind == "custom") return from_expr(Expr::from_json(j.at("density")), j.value("infinite_mass", false));
    if (kind == "grid")
      return from_grid({j.at("t0").get<double>(), j.at("h").get<double>(), j.at("values").get<std::vector<double>>()});
    throw ConfigError("unknown measure kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("measure: ") + e.what());
  }
}

namespace detail {

inline std::vector<double> merge_breaks(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

/// Integral of integrand(t) * density(t) over [a, b] with the shared
/// quadrature; grid-backed inputs contribute their knots as panel breaks.
template <class G>
double weighted_integral(G&& integrand, const WeightMeasure& mu, double a, double b,
                         const std::vector<double>& extra_breaks, const QuadratureOptions& opts) {
  if (a == b) return 0.0;
  auto fn = [&](double t) { return integrand(t) * mu.density(t); };
  auto breaks = merge_breaks(extra_breaks, mu.breakpoints(a, b));
  if (breaks.size() > 2) return integrate_panels(fn, breaks, opts).value;
  return integrate(fn, a, b, opts).value;
}

}  // namespace detail

/// mu([-r, r])
inline double mass(const WeightMeasure& mu, double r, const QuadratureOptions& opts = {}) {
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("mass: r must be positive and finite");
  return detail::weighted_integral([](double) { return 1.0; }, mu, -r, r, {}, opts);
}

/// mu([a, b])
inline double mass_between(const WeightMeasure& mu, double a, double b, const QuadratureOptions& opts = {}) {
  if (!(b >= a)) throw InvalidArgument("mass_between: need a <= b");
  return detail::weighted_integral([](double) { return 1.0; }, mu, a, b, {}, opts);
}

}  // namespace aalab
