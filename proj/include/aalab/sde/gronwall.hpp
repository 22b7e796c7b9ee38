#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "aalab/core/error.hpp"
#include "aalab/core/sampled_function.hpp"
#include "aalab/measures/ergodic.hpp"
#include "aalab/measures/weight_measure.hpp"

namespace aalab {

namespace detail {

/// I_j = integral from grid start to t_j of e^{-rate (t_j - s)} v(s) ds with
/// v linear between samples; each cell is integrated exactly.
inline std::vector<double> exp_convolution(const std::vector<double>& v, double h, double rate) {
  const double e = std::exp(-rate * h);
  const double a = -std::expm1(-rate * h) / rate;  // integral of e^{-rate (h - u)}
  const double b = h / rate - a / rate;            // integral of e^{-rate (h - u)} u
  std::vector<double> out(v.size(), 0.0);
  for (std::size_t j = 1; j < v.size(); ++j)
    out[j] = e * out[j - 1] + v[j - 1] * a + (v[j] - v[j - 1]) * b / h;
  return out;
}

}  // namespace detail

struct GronwallOptions {
  double grid_step = 0.01;
  double tail = 0.0;  // left truncation length; 0 selects 40 / min(delta_i)
  double tol = 1e-9;  // relative to the size of the right-hand side
};

struct GronwallReport {
  bool hypothesis_holds = false;
  bool conclusion_holds = false;       // general bound alpha + beta (e^{-gamma .} * alpha)
  bool constant_alpha = false;
  bool constant_bound_holds = true;    // g <= alpha delta / (delta - beta), constant alpha only
  double constant_bound = std::numeric_limits<double>::quiet_NaN();
  double worst_hypothesis_excess = 0.0;  // max of g - rhs (positive means violated)
  double worst_conclusion_excess = 0.0;
  double truncation_bias = 0.0;

  /// "pass", "hypothesis fails" or "conclusion fails".
  std::string verdict() const {
    if (!hypothesis_holds) return "hypothesis fails";
    return conclusion_holds && constant_bound_holds ? "pass" : "conclusion fails";
  }
  /// A failed conclusion must come with a failed hypothesis.
  bool consistent() const { return !hypothesis_holds || (conclusion_holds && constant_bound_holds); }

  nlohmann::json to_json() const {
    nlohmann::json j{{"verdict", verdict()},
                     {"hypothesis_holds", hypothesis_holds},
                     {"conclusion_holds", conclusion_holds},
                     {"constant_alpha", constant_alpha},
                     {"constant_bound_holds", constant_bound_holds},
                     {"worst_hypothesis_excess", worst_hypothesis_excess},
                     {"worst_conclusion_excess", worst_conclusion_excess},
                     {"truncation_bias", truncation_bias}};
    if (constant_alpha) j["constant_bound"] = constant_bound;
    return j;
  }
};

/// Evaluates, on the grid of `window`, the hypothesis
///   0 <= g(t) <= alpha(t) + sum_i beta_i int_{-inf}^t e^{-delta_i (t-s)} g(s) ds
/// and the conclusion g(t) <= alpha(t) + beta int_{-inf}^t e^{-gamma (t-s)} alpha(s) ds,
/// plus g <= alpha delta / (delta - beta) when alpha is constant.
inline GronwallReport gronwall_bound_check(const SampledFunction& alpha, const std::vector<double>& betas,
                                           const std::vector<double>& deltas, double gamma, const SampledFunction& g,
                                           double lo, double hi, const GronwallOptions& opt = {}) {
  if (betas.empty() || betas.size() != deltas.size()) throw InvalidArgument("gronwall: need matching betas and deltas");
  double beta = 0.0;
  for (double b : betas) {
    if (!(b >= 0.0)) throw InvalidArgument("gronwall: betas must be nonnegative");
    beta += b;
  }
  const double delta = *std::min_element(deltas.begin(), deltas.end());
  for (double d : deltas)
    if (!(d > beta)) throw InvalidArgument("gronwall: each delta_i must exceed beta = sum of betas");
  if (!(gamma > 0.0 && gamma <= delta - beta + 1e-15)) throw InvalidArgument("gronwall: gamma must lie in (0, delta - beta]");
  if (!(hi > lo) || !(opt.grid_step > 0.0)) throw InvalidArgument("gronwall: bad window or grid step");

  const double tail = opt.tail > 0.0 ? opt.tail : 40.0 / std::min(delta, gamma);
  const auto n_win = static_cast<std::size_t>(std::ceil((hi - lo) / opt.grid_step - 1e-9));
  const double h = (hi - lo) / static_cast<double>(n_win);
  const auto n_tail = static_cast<std::size_t>(std::ceil(tail / h));
  const double start = lo - static_cast<double>(n_tail) * h;
  const std::size_t n = n_tail + n_win + 1;

  std::vector<double> av(n), gv(n);
  double g_sup = 0.0, a_sup = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double t = start + static_cast<double>(j) * h;
    av[j] = alpha(t);
    gv[j] = g(t);
    g_sup = std::max(g_sup, std::abs(gv[j]));
    a_sup = std::max(a_sup, std::abs(av[j]));
  }

  GronwallReport rep;
  const double a0 = av[n_tail];
  rep.constant_alpha = std::all_of(av.begin(), av.end(), [&](double v) { return v == a0; });
  rep.truncation_bias = std::max(beta * g_sup * std::exp(-delta * tail) / delta, beta * a_sup * std::exp(-gamma * tail) / gamma);

  std::vector<std::vector<double>> conv;
  for (double d : deltas) conv.push_back(detail::exp_convolution(gv, h, d));
  const auto alpha_conv = detail::exp_convolution(av, h, gamma);

  rep.worst_hypothesis_excess = -std::numeric_limits<double>::infinity();
  rep.worst_conclusion_excess = -std::numeric_limits<double>::infinity();
  bool nonneg = true;
  for (std::size_t j = n_tail; j < n; ++j) {
    double rhs = av[j];
    for (std::size_t i = 0; i < betas.size(); ++i) rhs += betas[i] * conv[i][j];
    const double scale = opt.tol * std::max(1.0, std::abs(rhs)) + rep.truncation_bias;
    nonneg = nonneg && gv[j] >= -scale;
    rep.worst_hypothesis_excess = std::max(rep.worst_hypothesis_excess, gv[j] - rhs - scale);
    const double bound = av[j] + beta * alpha_conv[j];
    rep.worst_conclusion_excess =
        std::max(rep.worst_conclusion_excess, gv[j] - bound - opt.tol * std::max(1.0, std::abs(bound)) - rep.truncation_bias);
  }
  rep.hypothesis_holds = nonneg && rep.worst_hypothesis_excess <= 0.0;
  rep.conclusion_holds = rep.worst_conclusion_excess <= 0.0;
  if (rep.constant_alpha) {
    rep.constant_bound = a0 * delta / (delta - beta);
    for (std::size_t j = n_tail; j < n; ++j)
      if (gv[j] > rep.constant_bound + opt.tol * std::max(1.0, std::abs(rep.constant_bound))) rep.constant_bound_holds = false;
  }
  return rep;
}

struct ConvolutionErgodicityReport {
  ErgodicMeanCurve curve;     // ergodic means of F(t) = (int e^{-2 delta (t-s)} m(s)^2 ds)^{1/2}
  ErgodicMeanCurve input;     // ergodic means of |m| itself
  double sup_m = 0.0;
  double truncation_bias = 0.0;  // bound on the omitted left tail of F^2

  nlohmann::json to_json() const {
    return {{"curve", curve.to_json()}, {"input", input.to_json()}, {"sup_m", sup_m}, {"truncation_bias", truncation_bias}};
  }
};

/// F is tabulated on [-R - tail, R] with R the largest radius, then averaged.
inline ConvolutionErgodicityReport convolution_ergodicity_check(const SampledFunction& m, double delta,
                                                                const WeightMeasure& mu, const std::vector<double>& radii,
                                                                double grid_step = 0.01, double tail = 0.0) {
  if (!(delta > 0.0)) throw InvalidArgument("convolution check: delta must be positive");
  detail::check_radii(radii);
  if (!(grid_step > 0.0)) throw InvalidArgument("convolution check: grid step must be positive");
  if (tail <= 0.0) tail = 20.0 / delta;
  const double r = radii.back();
  const auto n_tail = static_cast<std::size_t>(std::ceil(tail / grid_step));
  const auto n_win = static_cast<std::size_t>(std::ceil(2.0 * r / grid_step - 1e-9));
  const double h = 2.0 * r / static_cast<double>(n_win);
  const double start = -r - static_cast<double>(n_tail) * h;
  std::vector<double> sq(n_tail + n_win + 1);
  ConvolutionErgodicityReport rep;
  for (std::size_t j = 0; j < sq.size(); ++j) {
    const double v = m(start + static_cast<double>(j) * h);
    rep.sup_m = std::max(rep.sup_m, std::abs(v));
    sq[j] = v * v;
  }
  const auto conv = detail::exp_convolution(sq, h, 2.0 * delta);
  GridSamples fs{-r, h, {}};
  for (std::size_t j = n_tail; j < conv.size(); ++j) fs.values.push_back(std::sqrt(std::max(0.0, conv[j])));
  rep.truncation_bias = rep.sup_m * rep.sup_m * std::exp(-2.0 * delta * static_cast<double>(n_tail) * h) / (2.0 * delta);
  rep.curve = ergodic_mean(SampledFunction::from_grid(std::move(fs), "convolution"), mu, radii, false);
  rep.input = ergodic_mean(m, mu, radii, false);
  return rep;
}

}  // namespace aalab
