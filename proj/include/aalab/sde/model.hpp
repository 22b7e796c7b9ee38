#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "aalab/core/error.hpp"
#include "aalab/core/expr.hpp"

namespace aalab {

/// dX = A X dt + f(t, X) dt + g(t, X) dW with A = -diag(decays) and W a
/// Wiener process whose components have variances `noise_variances`.
/// f has one expression per coordinate; g is dim x noise_dim, row-major.
struct SdeModel {
  std::size_t dim = 1;
  std::vector<double> decays;
  std::vector<Expr> f;
  std::vector<Expr> g;
  std::vector<double> noise_variances{1.0};
  double k_growth = 0.0;
  double k_lip = 0.0;

  std::size_t noise_dim() const { return noise_variances.size(); }
  double delta() const { return *std::min_element(decays.begin(), decays.end()); }
  double trace_q() const {
    double s = 0.0;
    for (double v : noise_variances) s += v;
    return s;
  }
  double k() const { return std::max(k_growth, k_lip); }
  const Expr& g_at(std::size_t i, std::size_t c) const { return g[i * noise_dim() + c]; }

  void validate() const {
    if (dim == 0) throw InvalidArgument("model dimension must be >= 1");
    if (decays.size() != dim) throw ShapeMismatch("need one decay rate per coordinate");
    for (double d : decays)
      if (!(d > 0.0) || !std::isfinite(d)) throw InvalidArgument("decay rates must be positive");
    if (f.size() != dim) throw ShapeMismatch("drift needs one expression per coordinate");
    if (noise_variances.empty()) throw InvalidArgument("need at least one noise component");
    for (double v : noise_variances)
      if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("noise variances must be nonnegative and finite");
    if (g.size() != dim * noise_dim()) throw ShapeMismatch("diffusion needs dim x noise_dim expressions");
    for (const auto* list : {&f, &g})
      for (const auto& e : *list)
        if (e.state_arity() > dim) throw ShapeMismatch("coefficient references a state index beyond the model dimension");
    if (!(k_growth >= 0.0) || !(k_lip >= 0.0)) throw InvalidArgument("declared constants must be nonnegative");
  }

  /// Same model with every coefficient evaluated at t + shift.
  SdeModel shifted(double shift) const {
    SdeModel out = *this;
    for (auto& e : out.f) e = e.shifted(shift);
    for (auto& e : out.g) e = e.shifted(shift);
    return out;
  }

  /// Diagonal semigroup norm ||exp(A t)|| = max_i exp(-delta_i t).
  double semigroup_norm(double t) const {
    double m = 0.0;
    for (double d : decays) m = std::max(m, std::exp(-d * t));
    return m;
  }

  nlohmann::json to_json() const {
    nlohmann::json jf = nlohmann::json::array(), jg = nlohmann::json::array();
    for (const auto& e : f) jf.push_back(e.to_json());
    for (const auto& e : g) jg.push_back(e.to_json());
    return {{"dim", dim}, {"decays", decays}, {"f", jf}, {"g", jg}, {"noise_variances", noise_variances},
            {"k_growth", k_growth}, {"k_lip", k_lip}};
  }
};

namespace detail {
// ||f(t, x)|| and the Frobenius norm of g(t, x).
inline std::pair<double, double> coefficient_norms(const SdeModel& m, double t, std::span<const double> x) {
  double sf = 0.0, sg = 0.0;
  for (const auto& e : m.f) {
    const double v = e(t, x);
    sf += v * v;
  }
  for (const auto& e : m.g) {
    const double v = e(t, x);
    sg += v * v;
  }
  return {std::sqrt(sf), std::sqrt(sg)};
}

inline std::pair<double, double> difference_norms(const SdeModel& m, double t, std::span<const double> x,
                                                  std::span<const double> y) {
  double sf = 0.0, sg = 0.0;
  for (const auto& e : m.f) {
    const double v = e(t, x) - e(t, y);
    sf += v * v;
  }
  for (const auto& e : m.g) {
    const double v = e(t, x) - e(t, y);
    sg += v * v;
  }
  return {std::sqrt(sf), std::sqrt(sg)};
}
}  // namespace detail

/// Constants implied by the expression trees: growth of ||f|| + ||g|| and the
/// Lipschitz constant of the pair, each summed over coordinates.
struct CertifiedConstants {
  double k_growth = 0.0;
  double k_lip = 0.0;
};

inline CertifiedConstants certify_constants(const SdeModel& m) {
  CertifiedConstants c;
  double gc = 0.0, gs = 0.0, lip = 0.0;
  for (const auto* list : {&m.f, &m.g})
    for (const auto& e : *list) {
      gc += e.growth_bound().constant;
      gs += e.growth_bound().slope;
      lip += e.lipschitz_bound();
    }
  c.k_growth = std::max(gc, gs);
  c.k_lip = lip;
  return c;
}

/// Random-sample audit of the declared K bounds.
struct ConstantsAudit {
  std::size_t samples = 0;
  double max_growth_quotient = 0.0;  // (||f|| + ||g||) / (1 + ||x||)
  double max_lip_quotient = 0.0;     // (||df|| + ||dg||) / ||x - y||
  bool growth_ok = true;
  bool lip_ok = true;
  bool ok() const { return growth_ok && lip_ok; }
  nlohmann::json to_json() const {
    return {{"samples", samples}, {"max_growth_quotient", max_growth_quotient}, {"max_lip_quotient", max_lip_quotient},
            {"growth_ok", growth_ok}, {"lip_ok", lip_ok}};
  }
};

inline ConstantsAudit audit_constants(const SdeModel& m, std::size_t samples = 2000, std::uint64_t seed = 1,
                                      double t_range = 1000.0, double x_scale = 10.0) {
  m.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ut(-t_range, t_range);
  std::normal_distribution<double> nx(0.0, x_scale);
  ConstantsAudit a;
  a.samples = samples;
  std::vector<double> x(m.dim), y(m.dim);
  for (std::size_t s = 0; s < samples; ++s) {
    const double t = ut(rng);
    double nx2 = 0.0, dxy2 = 0.0;
    for (std::size_t i = 0; i < m.dim; ++i) {
      x[i] = nx(rng);
      // half the pairs are close, to probe the local slope
      y[i] = (s % 2 == 0) ? x[i] + 1e-3 * nx(rng) / x_scale : nx(rng);
      nx2 += x[i] * x[i];
      dxy2 += (x[i] - y[i]) * (x[i] - y[i]);
    }
    const auto [nf, ng] = detail::coefficient_norms(m, t, x);
    a.max_growth_quotient = std::max(a.max_growth_quotient, (nf + ng) / (1.0 + std::sqrt(nx2)));
    if (dxy2 > 0.0) {
      const auto [df, dg] = detail::difference_norms(m, t, x, y);
      a.max_lip_quotient = std::max(a.max_lip_quotient, (df + dg) / std::sqrt(dxy2));
    }
  }
  a.growth_ok = a.max_growth_quotient <= m.k_growth + 1e-9;
  a.lip_ok = a.max_lip_quotient <= m.k_lip + 1e-9;
  return a;
}

/// f = f1 + f2, g = g1 + g2; part 1 is the almost automorphic part and
/// part 2 the ergodic part.
struct CoefficientSplit {
  std::vector<Expr> f1, f2, g1, g2;

  void check_shapes(const SdeModel& base) const {
    if (f1.size() != base.dim || f2.size() != base.dim) throw ShapeMismatch("split drift parts need dim entries");
    if (g1.size() != base.dim * base.noise_dim() || g2.size() != base.dim * base.noise_dim())
      throw ShapeMismatch("split diffusion parts need dim x noise_dim entries");
  }

  /// `base` supplies decays, noise and declared constants.
  SdeModel full(const SdeModel& base) const {
    check_shapes(base);
    SdeModel m = base;
    m.f.clear();
    m.g.clear();
    for (std::size_t i = 0; i < f1.size(); ++i) m.f.push_back(f1[i] + f2[i]);
    for (std::size_t i = 0; i < g1.size(); ++i) m.g.push_back(g1[i] + g2[i]);
    return m;
  }
  SdeModel aa_part(const SdeModel& base) const {
    check_shapes(base);
    SdeModel m = base;
    m.f = f1;
    m.g = g1;
    return m;
  }

  /// Largest |f - f1 - f2| and |g - g1 - g2| over random (t, x).
  double sum_identity_error(const SdeModel& model, std::size_t samples = 1000, std::uint64_t seed = 2) const {
    check_shapes(model);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(-1000.0, 1000.0);
    std::normal_distribution<double> nx(0.0, 10.0);
    std::vector<double> x(model.dim);
    double worst = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
      const double t = ut(rng);
      for (double& v : x) v = nx(rng);
      for (std::size_t i = 0; i < f1.size(); ++i)
        worst = std::max(worst, std::abs(model.f[i](t, x) - f1[i](t, x) - f2[i](t, x)));
      for (std::size_t i = 0; i < g1.size(); ++i)
        worst = std::max(worst, std::abs(model.g[i](t, x) - g1[i](t, x) - g2[i](t, x)));
    }
    return worst;
  }
};

struct ThetaReport {
  double theta = 0.0;
  double theta_prime = 0.0;
  bool theta_valid() const { return theta < 1.0; }
  bool theta_prime_valid() const { return theta_prime < 1.0; }
  nlohmann::json to_json() const {
    return {{"theta", theta}, {"theta_prime", theta_prime}, {"theta_valid", theta_valid()},
            {"theta_prime_valid", theta_prime_valid()}};
  }
};

/// (K^2 / delta) (1 / (2 delta) + Tr Q)
inline double theta(double k, double delta, double trace_q) { return k * k / delta * (0.5 / delta + trace_q); }
/// (4 K^2 / delta) (1 / delta + Tr Q)
inline double theta_prime(double k, double delta, double trace_q) { return 4.0 * k * k / delta * (1.0 / delta + trace_q); }

inline double theta(const SdeModel& m) { return theta(m.k(), m.delta(), m.trace_q()); }
inline double theta_prime(const SdeModel& m) { return theta_prime(m.k(), m.delta(), m.trace_q()); }
inline ThetaReport theta_report(const SdeModel& m) { return {theta(m), theta_prime(m)}; }

}  // namespace aalab
