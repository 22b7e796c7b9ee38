#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "aalab/core/expr.hpp"

using namespace aalab;
using Catch::Approx;

TEST_CASE("catalog functions evaluate to their closed forms") {
  const auto ap2 = catalog::ap2(1.0, std::numbers::sqrt2);
  const auto lev = catalog::levitan();
  const auto e1 = catalog::erg1();
  const auto e2 = catalog::erg2();
  for (double t : {-7.3, -1.0, 0.0, 0.5, 2.0, 13.25}) {
    CHECK(ap2(t) == Approx(std::sin(t) + std::sin(std::numbers::sqrt2 * t)).margin(1e-15));
    CHECK(lev(t) == Approx(std::sin(1.0 / (2.0 + std::cos(t) + std::cos(std::numbers::sqrt2 * t)))).margin(1e-13));
    CHECK(e1(t) == Approx(1.0 / (1.0 + t * t)).margin(1e-16));
    CHECK(e2(t) == Approx(std::exp(-std::abs(t))).margin(1e-16));
  }
}

TEST_CASE("levitan stays bounded where its denominator vanishes") {
  // 2 + cos(pi) + cos(sqrt2 * t) vanishes only asymptotically; force the
  // clamp by evaluating the reciprocal of an exact zero.
  const auto r = fx::sin(fx::recip(fx::c(0.0), 0.0));
  CHECK(std::isfinite(r(0.0)));
  CHECK(std::abs(r(0.0)) <= 1.0);
}

TEST_CASE("composition substitutes time") {
  const auto outer = fx::sin(fx::t()) + fx::affine(2.0, 1.0);
  const auto inner = fx::t() * fx::t();
  const auto comp = fx::compose(outer, inner);
  for (double t : {-1.5, 0.0, 0.7, 3.0})
    CHECK(comp(t) == Approx(std::sin(t * t) + 2.0 * t * t + 1.0));
  const auto shifted = catalog::erg1().shifted(3.0);
  CHECK(shifted(-3.0) == Approx(1.0));
  // Nested composition: (sin o (t+1)) o (2t)
  const auto nested = fx::compose(fx::compose(fx::sin(fx::t()), fx::affine(1.0, 1.0)), fx::affine(2.0, 0.0));
  CHECK(nested(0.25) == Approx(std::sin(1.5)));
}

TEST_CASE("state-dependent expressions and bounds") {
  const auto f = 0.3 * fx::tanh(fx::x(0)) + 0.2 * fx::sin(fx::t());
  const std::vector<double> x{0.7};
  CHECK(f(1.0, x) == Approx(0.3 * std::tanh(0.7) + 0.2 * std::sin(1.0)));
  CHECK(f.lipschitz_bound() == Approx(0.3));
  CHECK(f.growth_bound().constant == Approx(0.2));
  CHECK(f.growth_bound().slope == Approx(0.3));
  CHECK(f.depends_on_state());
  CHECK(f.state_arity() == 1);
  CHECK_THROWS_AS(f(0.0), InvalidArgument);

  const auto g = fx::clip(fx::x(1)) * catalog::erg1();
  CHECK(g.lipschitz_bound() == Approx(1.0));
  CHECK(g.sup_bound() == Approx(1.0));
  CHECK(g.state_arity() == 2);
}

TEST_CASE("declared Lipschitz bounds hold on random samples") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  const std::vector<Expr> exprs{
      0.3 * fx::tanh(fx::x(0)) + 0.1 * catalog::ap2(1.0, 2.0),
      fx::clip(fx::x(0)) * catalog::erg2() + 0.2 * fx::x(0),
      fx::sin(fx::x(0)) * fx::cos(fx::t()),
      fx::exp(fx::tanh(fx::x(0))),
  };
  for (const auto& e : exprs) {
    const double lip = e.lipschitz_bound();
    REQUIRE(std::isfinite(lip));
    for (int i = 0; i < 2000; ++i) {
      const double t = u(rng);
      const std::vector<double> x{u(rng)}, y{u(rng)};
      CHECK(std::abs(e(t, x) - e(t, y)) <= lip * std::abs(x[0] - y[0]) + 1e-12);
      const auto g = e.growth_bound();
      CHECK(std::abs(e(t, x)) <= g.constant + g.slope * std::abs(x[0]) + 1e-12);
    }
  }
}

TEST_CASE("json round trip preserves values") {
  const auto e = fx::compose(catalog::levitan() + 0.5 * catalog::erg1(), fx::affine(1.0, 2.0)) +
                 fx::clip(fx::x(0)) * fx::exp(-fx::abs(fx::t()));
  const auto back = Expr::from_json(e.to_json());
  for (double t : {-2.0, 0.1, 4.0}) {
    const std::vector<double> x{0.4};
    CHECK(back(t, x) == e(t, x));
  }
  CHECK(Expr::from_json(nlohmann::json{{"catalog", "AP2"}, {"a", 1.0}, {"b", 2.0}})(0.3) ==
        Approx(std::sin(0.3) + std::sin(0.6)));
  CHECK(Expr::from_json("ERG2")(1.0) == Approx(std::exp(-1.0)));
  CHECK_THROWS_AS(Expr::from_json(nlohmann::json{{"op", "nope"}}), ConfigError);
  CHECK_THROWS_AS(Expr::from_json("NOT_IN_CATALOG"), ConfigError);
}
