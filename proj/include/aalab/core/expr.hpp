#pragma once

// Expression trees over time t and state x, used for deterministic test
// functions and for SDE coefficients. Each tree is compiled once into a flat
// postfix program; evaluation is allocation-free.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "aalab/core/error.hpp"

namespace aalab {

/// |x| below this is clamped before taking a reciprocal.
inline constexpr double kReciprocalClamp = 1e-12;

/// Affine bound |e(t, x)| <= constant + slope * ||x||.
struct LinearGrowth {
  double constant = 0.0;
  double slope = 0.0;
  double k() const { return std::max(constant, slope); }
};

class Expr {
 public:
  enum class Op {
    kConstant,
    kTime,
    kState,
    kAffine,  // a*t + b
    kSin,
    kCos,
    kTanh,
    kExp,
    kAbs,
    kRecip,       // 1 / x with |x| floored
    kClipLinear,  // clamp(x, -1, 1)
    kAdd,
    kMul,
    kCompose,  // children[0] evaluated with t := children[1]
  };

  Expr() : Expr(constant(0.0)) {}

  static Expr constant(double c) { return make(Op::kConstant, {}, c); }
  static Expr time() { return make(Op::kTime, {}); }
  static Expr state(std::size_t index) { return make(Op::kState, {}, 0.0, 0.0, index); }
  static Expr affine(double a, double b) { return make(Op::kAffine, {}, a, b); }
  static Expr unary(Op op, Expr child, double param = 0.0) {
    return make(op, {std::move(child)}, param);
  }
  static Expr recip(Expr child, double floor) {
    if (!(floor >= 0.0)) throw InvalidArgument("recip: floor must be >= 0");
    return make(Op::kRecip, {std::move(child)}, floor);
  }
  static Expr add(Expr a, Expr b) { return make(Op::kAdd, {std::move(a), std::move(b)}); }
  static Expr mul(Expr a, Expr b) { return make(Op::kMul, {std::move(a), std::move(b)}); }
  /// outer(inner(t, x), x)
  static Expr compose(Expr outer, Expr inner) {
    return make(Op::kCompose, {std::move(outer), std::move(inner)});
  }

  double operator()(double t, std::span<const double> x = {}) const {
    return node_->program.run(t, x);
  }

  Op op() const { return node_->op; }
  std::span<const Expr> children() const { return node_->children; }
  double param_a() const { return node_->a; }
  double param_b() const { return node_->b; }
  std::size_t state_index() const { return node_->index; }

  bool depends_on_time() const { return node_->depends_t; }
  bool depends_on_state() const { return node_->depends_x; }
  /// Largest state index referenced plus one (0 when state-free).
  std::size_t state_arity() const { return node_->arity; }

  /// Upper bound of sup |e| over all (t, x); may be +inf.
  double sup_bound() const { return node_->sup; }
  /// Lipschitz bound in x (Euclidean norm), uniform in t; may be +inf.
  double lipschitz_bound() const { return node_->lip; }
  LinearGrowth growth_bound() const { return node_->growth; }

  /// h(t + shift)
  Expr shifted(double shift) const { return compose(*this, affine(1.0, shift)); }

  std::string describe() const;
  nlohmann::json to_json() const;
  static Expr from_json(const nlohmann::json& j);

 private:
  struct Instr {
    Op op;
    double a = 0.0, b = 0.0;
    std::size_t index = 0;
  };

  struct Program {
    std::vector<Instr> code;
    std::size_t depth = 0;

    double run(double t, std::span<const double> x) const {
      constexpr std::size_t kInline = 32;
      std::array<double, kInline> small;
      std::vector<double> big;
      double* stack = small.data();
      if (depth > kInline) {
        big.resize(depth);
        stack = big.data();
      }
      std::size_t sp = 0;
      for (const Instr& in : code) {
        switch (in.op) {
          case Op::kConstant: stack[sp++] = in.a; break;
          case Op::kTime: stack[sp++] = t; break;
          case Op::kState:
            if (in.index >= x.size()) throw InvalidArgument("expression references missing state x" + std::to_string(in.index));
            stack[sp++] = x[in.index];
            break;
          case Op::kAffine: stack[sp - 1] = in.a * stack[sp - 1] + in.b; break;
          case Op::kSin: stack[sp - 1] = std::sin(stack[sp - 1]); break;
          case Op::kCos: stack[sp - 1] = std::cos(stack[sp - 1]); break;
          case Op::kTanh: stack[sp - 1] = std::tanh(stack[sp - 1]); break;
          case Op::kExp: stack[sp - 1] = std::exp(stack[sp - 1]); break;
          case Op::kAbs: stack[sp - 1] = std::abs(stack[sp - 1]); break;
          case Op::kRecip: {
            const double v = stack[sp - 1];
            const double mag = std::max({std::abs(v), in.a, kReciprocalClamp});
            stack[sp - 1] = (v < 0.0 ? -1.0 : 1.0) / mag;
            break;
          }
          case Op::kClipLinear: stack[sp - 1] = std::clamp(stack[sp - 1], -1.0, 1.0); break;
          case Op::kAdd: --sp; stack[sp - 1] += stack[sp]; break;
          case Op::kMul: --sp; stack[sp - 1] *= stack[sp]; break;
          case Op::kCompose: break;  // eliminated at compile time
        }
      }
      return stack[0];
    }
  };

  struct Node {
    Op op;
    std::vector<Expr> children;
    double a = 0.0, b = 0.0;
    std::size_t index = 0;
    bool depends_t = false, depends_x = false;
    std::size_t arity = 0;
    double lo = 0.0, hi = 0.0;  // range of values over all (t, x)
    double sup = 0.0, lip = 0.0;
    LinearGrowth growth;
    Program program;
  };

  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static Expr make(Op op, std::vector<Expr> children, double a = 0.0, double b = 0.0,
                   std::size_t index = 0);

  // Emits postfix code; `subst` replaces the time leaf (for composition).
  struct Subst {
    const Expr* expr;
    const Subst* outer;
  };
  static void emit(const Expr& e, const Subst* subst, std::vector<Instr>& out);

  std::shared_ptr<const Node> node_;
};

inline Expr operator+(Expr a, Expr b) { return Expr::add(std::move(a), std::move(b)); }
inline Expr operator*(Expr a, Expr b) { return Expr::mul(std::move(a), std::move(b)); }
inline Expr operator*(double c, Expr e) { return Expr::mul(Expr::constant(c), std::move(e)); }
inline Expr operator+(double c, Expr e) { return Expr::add(Expr::constant(c), std::move(e)); }
inline Expr operator+(Expr e, double c) { return Expr::add(std::move(e), Expr::constant(c)); }
inline Expr operator*(Expr e, double c) { return Expr::mul(std::move(e), Expr::constant(c)); }
inline Expr operator-(Expr e) { return Expr::mul(Expr::constant(-1.0), std::move(e)); }
inline Expr operator-(Expr a, Expr b) { return a + (-std::move(b)); }

namespace fx {
inline Expr t() { return Expr::time(); }
inline Expr x(std::size_t k = 0) { return Expr::state(k); }
inline Expr c(double v) { return Expr::constant(v); }
inline Expr affine(double a, double b) { return Expr::affine(a, b); }
inline Expr sin(Expr e) { return Expr::unary(Expr::Op::kSin, std::move(e)); }
inline Expr cos(Expr e) { return Expr::unary(Expr::Op::kCos, std::move(e)); }
inline Expr tanh(Expr e) { return Expr::unary(Expr::Op::kTanh, std::move(e)); }
inline Expr exp(Expr e) { return Expr::unary(Expr::Op::kExp, std::move(e)); }
inline Expr abs(Expr e) { return Expr::unary(Expr::Op::kAbs, std::move(e)); }
inline Expr clip(Expr e) { return Expr::unary(Expr::Op::kClipLinear, std::move(e)); }
inline Expr recip(Expr e, double floor) { return Expr::recip(std::move(e), floor); }
inline Expr compose(Expr outer, Expr inner) { return Expr::compose(std::move(outer), std::move(inner)); }
}  // namespace fx

/// Built-in test functions.
namespace catalog {
/// sin(a t) + sin(b t)
inline Expr ap2(double a, double b) {
  return fx::sin(fx::affine(a, 0.0)) + fx::sin(fx::affine(b, 0.0));
}
/// sin(1 / (2 + cos t + cos(sqrt(2) t))): almost automorphic, not uniformly continuous.
inline Expr levitan() {
  return fx::sin(fx::recip(2.0 + fx::cos(fx::t()) + fx::cos(fx::affine(std::numbers::sqrt2, 0.0)), 0.0));
}
/// 1 / (1 + t^2)
inline Expr erg1() { return fx::recip(1.0 + fx::t() * fx::t(), 1.0); }
/// exp(-|t|)
inline Expr erg2() { return fx::exp(-fx::abs(fx::t())); }
inline Expr sine(double freq = 1.0) { return fx::sin(fx::affine(freq, 0.0)); }

/// Resolves a catalog name; parameters come from `j` (may be null).
Expr lookup(const std::string& name, const nlohmann::json& j);
}  // namespace catalog

// ---------------------------------------------------------------------------

namespace detail {
inline double mul_bound(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  return a * b;
}
inline LinearGrowth best_growth(LinearGrowth p, LinearGrowth q) {
  if (p.k() != q.k()) return p.k() < q.k() ? p : q;
  return p.constant <= q.constant ? p : q;
}
inline constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace detail

inline Expr Expr::make(Op op, std::vector<Expr> children, double a, double b, std::size_t index) {
  using detail::kInf;
  using detail::mul_bound;
  auto n = std::make_shared<Node>();
  n->op = op;
  n->children = std::move(children);
  n->a = a;
  n->b = b;
  n->index = index;
  const auto& ch = n->children;
  const std::size_t want = (op == Op::kAdd || op == Op::kMul || op == Op::kCompose) ? 2
                           : (op == Op::kConstant || op == Op::kTime || op == Op::kState || op == Op::kAffine) ? 0
                                                                                                            : 1;
  if (ch.size() != want) throw InvalidArgument("expression node has wrong child count");
  for (const auto& c : ch) {
    n->depends_t = n->depends_t || c.depends_on_time();
    n->depends_x = n->depends_x || c.depends_on_state();
    n->arity = std::max(n->arity, c.state_arity());
  }
  const double recip_floor = std::max(a, kReciprocalClamp);
  auto set_range = [&](double lo, double hi) {
    n->lo = lo;
    n->hi = hi;
    n->sup = std::max(std::abs(lo), std::abs(hi));
  };
  switch (op) {
    case Op::kConstant:
      set_range(a, a);
      n->growth = {std::abs(a), 0.0};
      break;
    case Op::kTime:
      n->depends_t = true;
      set_range(-kInf, kInf);
      n->growth = {kInf, 0.0};
      break;
    case Op::kAffine:
      n->depends_t = a != 0.0;
      if (a == 0.0)
        set_range(b, b);
      else
        set_range(-kInf, kInf);
      n->growth = {n->sup, 0.0};
      break;
    case Op::kState:
      n->depends_x = true;
      n->arity = index + 1;
      set_range(-kInf, kInf);
      n->lip = 1.0;
      n->growth = {0.0, 1.0};
      break;
    case Op::kSin:
    case Op::kCos:
      set_range(-1.0, 1.0);
      n->lip = ch[0].lipschitz_bound();
      n->growth = op == Op::kSin ? detail::best_growth({1.0, 0.0}, ch[0].growth_bound()) : LinearGrowth{1.0, 0.0};
      break;
    case Op::kTanh:
      set_range(std::tanh(ch[0].node_->lo), std::tanh(ch[0].node_->hi));
      n->lip = ch[0].lipschitz_bound();
      n->growth = detail::best_growth({1.0, 0.0}, ch[0].growth_bound());
      break;
    case Op::kClipLinear:
      set_range(std::clamp(ch[0].node_->lo, -1.0, 1.0), std::clamp(ch[0].node_->hi, -1.0, 1.0));
      n->lip = ch[0].lipschitz_bound();
      n->growth = detail::best_growth({1.0, 0.0}, ch[0].growth_bound());
      break;
    case Op::kAbs: {
      const double lo = ch[0].node_->lo, hi = ch[0].node_->hi;
      if (lo >= 0.0)
        set_range(lo, hi);
      else if (hi <= 0.0)
        set_range(-hi, -lo);
      else
        set_range(0.0, std::max(-lo, hi));
      n->lip = ch[0].lipschitz_bound();
      n->growth = ch[0].growth_bound();
      break;
    }
    case Op::kExp: {
      set_range(std::exp(ch[0].node_->lo), std::exp(ch[0].node_->hi));
      n->lip = mul_bound(n->hi, ch[0].lipschitz_bound());
      n->growth = {n->sup, 0.0};
      break;
    }
    case Op::kRecip: {
      const double lo = ch[0].node_->lo;
      if (lo > 0.0) {
        const double m = std::max(lo, recip_floor);
        set_range(0.0, 1.0 / m);
        n->lip = mul_bound(1.0 / (m * m), ch[0].lipschitz_bound());
      } else {
        set_range(-1.0 / recip_floor, 1.0 / recip_floor);
        n->lip = mul_bound(1.0 / (recip_floor * recip_floor), ch[0].lipschitz_bound());
      }
      n->growth = {n->sup, 0.0};
      break;
    }
    case Op::kAdd: {
      const double lo = ch[0].node_->lo + ch[1].node_->lo;
      const double hi = ch[0].node_->hi + ch[1].node_->hi;
      set_range(std::isnan(lo) ? -kInf : lo, std::isnan(hi) ? kInf : hi);
      n->lip = ch[0].lipschitz_bound() + ch[1].lipschitz_bound();
      n->growth = {ch[0].growth_bound().constant + ch[1].growth_bound().constant,
                   ch[0].growth_bound().slope + ch[1].growth_bound().slope};
      break;
    }
    case Op::kMul: {
      const double sa = ch[0].sup_bound(), sb = ch[1].sup_bound();
      const double c1 = mul_bound(ch[0].node_->lo, ch[1].node_->lo), c2 = mul_bound(ch[0].node_->lo, ch[1].node_->hi);
      const double c3 = mul_bound(ch[0].node_->hi, ch[1].node_->lo), c4 = mul_bound(ch[0].node_->hi, ch[1].node_->hi);
      set_range(std::min({c1, c2, c3, c4}), std::max({c1, c2, c3, c4}));
      n->lip = mul_bound(sa, ch[1].lipschitz_bound()) + mul_bound(sb, ch[0].lipschitz_bound());
      LinearGrowth g{kInf, kInf};
      if (std::isfinite(sa))
        g = detail::best_growth(g, {mul_bound(sa, ch[1].growth_bound().constant),
                                    mul_bound(sa, ch[1].growth_bound().slope)});
      if (std::isfinite(sb))
        g = detail::best_growth(g, {mul_bound(sb, ch[0].growth_bound().constant),
                                    mul_bound(sb, ch[0].growth_bound().slope)});
      n->growth = g;
      break;
    }
    case Op::kCompose: {
      const Expr& outer = ch[0];
      const Expr& inner = ch[1];
      n->depends_t = inner.depends_on_time() && outer.depends_on_time();
      n->depends_x = outer.depends_on_state() || (outer.depends_on_time() && inner.depends_on_state());
      set_range(outer.node_->lo, outer.node_->hi);
      if (!outer.depends_on_time() || !inner.depends_on_state()) {
        n->lip = outer.lipschitz_bound();
        n->growth = outer.growth_bound();
      } else {
        n->lip = kInf;
        n->growth = {kInf, kInf};
      }
      break;
    }
  }
  Expr self{std::shared_ptr<const Node>(n)};
  emit(self, nullptr, n->program.code);
  // Stack depth of a postfix program.
  std::size_t sp = 0, depth = 0;
  for (const Instr& in : n->program.code) {
    if (in.op == Op::kConstant || in.op == Op::kTime || in.op == Op::kState) ++sp;
    if (in.op == Op::kAdd || in.op == Op::kMul) --sp;
    depth = std::max(depth, sp);
  }
  n->program.depth = depth;
  return self;
}

inline void Expr::emit(const Expr& e, const Subst* subst, std::vector<Instr>& out) {
  const Node& n = *e.node_;
  switch (n.op) {
    case Op::kTime:
      if (subst)
        emit(*subst->expr, subst->outer, out);
      else
        out.push_back({Op::kTime});
      return;
    case Op::kAffine:
      if (subst)
        emit(*subst->expr, subst->outer, out);
      else
        out.push_back({Op::kTime});
      out.push_back({Op::kAffine, n.a, n.b});
      return;
    case Op::kConstant:
      out.push_back({Op::kConstant, n.a});
      return;
    case Op::kState:
      out.push_back({Op::kState, 0.0, 0.0, n.index});
      return;
    case Op::kCompose: {
      const Subst inner{&n.children[1], subst};
      emit(n.children[0], &inner, out);
      return;
    }
    case Op::kAdd:
    case Op::kMul:
      emit(n.children[0], subst, out);
      emit(n.children[1], subst, out);
      out.push_back({n.op});
      return;
    default:
      emit(n.children[0], subst, out);
      out.push_back({n.op, n.a});
      return;
  }
}

namespace detail {
inline const char* op_name(Expr::Op op) {
  switch (op) {
    case Expr::Op::kConstant: return "const";
    case Expr::Op::kTime: return "t";
    case Expr::Op::kState: return "x";
    case Expr::Op::kAffine: return "affine";
    case Expr::Op::kSin: return "sin";
    case Expr::Op::kCos: return "cos";
    case Expr::Op::kTanh: return "tanh";
    case Expr::Op::kExp: return "exp";
    case Expr::Op::kAbs: return "abs";
    case Expr::Op::kRecip: return "recip";
    case Expr::Op::kClipLinear: return "clip";
    case Expr::Op::kAdd: return "add";
    case Expr::Op::kMul: return "mul";
    case Expr::Op::kCompose: return "compose";
  }
  return "?";
}

inline std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

inline std::string Expr::describe() const {
  const Node& n = *node_;
  switch (n.op) {
    case Op::kConstant: return detail::fmt_num(n.a);
    case Op::kTime: return "t";
    case Op::kState: return "x" + std::to_string(n.index);
    case Op::kAffine: return "(" + detail::fmt_num(n.a) + "*t+" + detail::fmt_num(n.b) + ")";
    case Op::kAdd: return "(" + n.children[0].describe() + " + " + n.children[1].describe() + ")";
    case Op::kMul: return "(" + n.children[0].describe() + " * " + n.children[1].describe() + ")";
    case Op::kCompose: return n.children[0].describe() + "[t:=" + n.children[1].describe() + "]";
    case Op::kRecip: return "recip_" + detail::fmt_num(n.a) + "(" + n.children[0].describe() + ")";
    default: return std::string(detail::op_name(n.op)) + "(" + n.children[0].describe() + ")";
  }
}

inline nlohmann::json Expr::to_json() const {
  const Node& n = *node_;
  nlohmann::json j;
  j["op"] = detail::op_name(n.op);
  switch (n.op) {
    case Op::kConstant: j["value"] = n.a; break;
    case Op::kTime: break;
    case Op::kState: j["index"] = n.index; break;
    case Op::kAffine:
      j["a"] = n.a;
      j["b"] = n.b;
      break;
    case Op::kAdd:
    case Op::kMul:
      j["args"] = {n.children[0].to_json(), n.children[1].to_json()};
      break;
    case Op::kCompose:
      j["outer"] = n.children[0].to_json();
      j["inner"] = n.children[1].to_json();
      break;
    case Op::kRecip:
      j["floor"] = n.a;
      j["arg"] = n.children[0].to_json();
      break;
    default: j["arg"] = n.children[0].to_json(); break;
  }
  return j;
}

inline Expr Expr::from_json(const nlohmann::json& j) {
  if (j.is_number()) return constant(j.get<double>());
  if (j.is_string()) return catalog::lookup(j.get<std::string>(), nullptr);
  if (!j.is_object()) throw ConfigError("expression must be a number, catalog name or object");
  if (j.contains("catalog")) return catalog::lookup(j.at("catalog").get<std::string>(), j);
  if (!j.contains("op")) throw ConfigError("expression object needs 'op' or 'catalog'");
  const auto op = j.at("op").get<std::string>();
  auto arg = [&] { return from_json(j.at("arg")); };
  auto fold = [&](bool is_add) {
    const auto& args = j.at("args");
    if (!args.is_array() || args.empty()) throw ConfigError(op + ": 'args' must be a non-empty array");
    Expr acc = from_json(args[0]);
    for (std::size_t i = 1; i < args.size(); ++i)
      acc = is_add ? add(acc, from_json(args[i])) : mul(acc, from_json(args[i]));
    return acc;
  };
  try {
    if (op == "const") return constant(j.at("value").get<double>());
    if (op == "t") return time();
    if (op == "x") return state(j.value("index", std::size_t{0}));
    if (op == "affine") return affine(j.at("a").get<double>(), j.value("b", 0.0));
    if (op == "sin") return unary(Op::kSin, arg());
    if (op == "cos") return unary(Op::kCos, arg());
    if (op == "tanh") return unary(Op::kTanh, arg());
    if (op == "exp") return unary(Op::kExp, arg());
    if (op == "abs") return unary(Op::kAbs, arg());
    if (op == "clip") return unary(Op::kClipLinear, arg());
    if (op == "recip") return recip(arg(), j.value("floor", 0.0));
    if (op == "add") return fold(true);
    if (op == "mul") return fold(false);
    if (op == "compose") return compose(from_json(j.at("outer")), from_json(j.at("inner")));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("expression '" + op + "': " + e.what());
  }
  throw ConfigError("unknown expression op '" + op + "'");
}

inline Expr catalog::lookup(const std::string& name, const nlohmann::json& j) {
  auto param = [&](const char* key, double fallback) {
    return (j.is_object() && j.contains(key)) ? j.at(key).get<double>() : fallback;
  };
  Expr base;
  if (name == "AP2")
    base = ap2(param("a", 1.0), param("b", std::numbers::sqrt2));
  else if (name == "LEVITAN")
    base = levitan();
  else if (name == "ERG1")
    base = erg1();
  else if (name == "ERG2")
    base = erg2();
  else if (name == "SIN")
    base = sine(param("a", 1.0));
  else if (name == "CONST")
    base = Expr::constant(param("value", 1.0));
  else
    throw ConfigError("unknown catalog function '" + name + "'");
  const double scale = param("scale", 1.0);
  return scale == 1.0 ? base : scale * base;
}

}  // namespace aalab
