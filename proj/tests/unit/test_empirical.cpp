#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "aalab/empirical/bl_distance.hpp"
#include "aalab/empirical/integrability.hpp"
#include "aalab/empirical/tightness.hpp"
#include "aalab/processes/ou.hpp"

using namespace aalab;
using Catch::Approx;

namespace {
EmpiricalMeasure line(std::vector<double> pts, std::vector<double> w) {
  return EmpiricalMeasure(1, std::move(pts), std::move(w));
}

EmpiricalMeasure random_measure(std::mt19937_64& rng, std::size_t n, std::size_t dim, double spread) {
  std::uniform_real_distribution<double> x(-spread, spread), w(0.05, 1.0);
  std::vector<double> coords(n * dim), weights(n);
  for (double& c : coords) c = x(rng);
  double s = 0.0;
  for (double& v : weights) s += (v = w(rng));
  for (double& v : weights) v /= s;
  return EmpiricalMeasure(dim, coords, weights);
}

void check_optimizer(const BLDistanceResult& r, const Metric& m) {
  const std::size_t n = r.optimizer.size();
  double obj = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    CHECK(std::abs(r.optimizer[a]) <= 1.0 + 1e-9);
    obj += r.optimizer[a] * r.excess[a];
    for (std::size_t b = 0; b < n; ++b) {
      const double d = m(r.support.data() + a * r.dim, r.support.data() + b * r.dim, r.dim);
      CHECK(std::abs(r.optimizer[a] - r.optimizer[b]) <= d + 1e-9);
    }
  }
  CHECK(obj == Approx(r.value).margin(1e-9));
  CHECK(std::abs(r.duality_gap) < 1e-9);
}

// Equal-size uniform measures: d_BL is the optimal assignment under min(d, 2).
double assignment_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<std::size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = 1e300;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::min(std::abs(a[i] - b[perm[i]]), 2.0);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(a.size());
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }
}  // namespace

TEST_CASE("hand-checked distances and the brute-force oracle") {
  struct Case {
    EmpiricalMeasure mu, nu;
    double expected;
  };
  const std::vector<Case> cases{
      {EmpiricalMeasure::dirac({0.0}), EmpiricalMeasure::dirac({1.0}), 1.0},
      {line({0.0, 1.0}, {0.5, 0.5}), EmpiricalMeasure::dirac({0.0}), 0.5},
      {EmpiricalMeasure::dirac({0.0}), EmpiricalMeasure::dirac({3.0}), 2.0},
  };
  for (const auto& c : cases) {
    const auto lp = bl_distance_transport(c.mu, c.nu);
    const auto fast = bl_distance(c.mu, c.nu);
    const auto brute = bl_distance_oracle(c.mu, c.nu);
    CHECK(lp.value == Approx(c.expected).margin(1e-12));
    CHECK(fast.value == Approx(c.expected).margin(1e-12));
    CHECK(brute.value == Approx(lp.value).margin(2e-3));
    CHECK(lp.method == "lp");
    CHECK(fast.method == "line");
    CHECK(brute.method == "oracle");
    check_optimizer(lp, c.mu.metric());
    check_optimizer(fast, c.mu.metric());
  }
  const auto same = bl_distance(line({0.3, -2.0}, {0.25, 0.75}), line({-2.0, 0.3}, {0.75, 0.25}));
  CHECK(same.value == 0.0);
  for (double f : same.optimizer) CHECK(f == 0.0);
}

TEST_CASE("oracle refuses large supports") {
  CHECK_THROWS_AS(bl_distance_oracle(line({0, 1, 2}, {0.2, 0.3, 0.5}), EmpiricalMeasure::dirac({5.0})),
                  InvalidArgument);
  CHECK_THROWS_AS(bl_distance(EmpiricalMeasure::dirac({0.0}), EmpiricalMeasure::dirac({0.0, 1.0})), ShapeMismatch);
}

TEST_CASE("LP matches the oracle on random small cases") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> x(-2.0, 2.0), w(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const double p = w(rng), q = w(rng);
    const auto mu = line({x(rng), x(rng)}, {p, 1.0 - p});
    const auto nu = trial % 2 ? EmpiricalMeasure::dirac({x(rng)}) : line({mu.point(0)[0], x(rng)}, {q, 1.0 - q});
    const auto lp = bl_distance(mu, nu);
    CHECK(bl_distance_oracle(mu, nu).value == Approx(lp.value).margin(2e-3));
    check_optimizer(lp, mu.metric());
  }
}

TEST_CASE("line program agrees with the transport solver") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_int_distribution<int> size(1, 60);
  for (int trial = 0; trial < 200; ++trial) {
    const double scale = trial % 3 == 0 ? 0.05 : (trial % 3 == 1 ? 1.0 : 4.0);
    auto draw = [&] {
      std::vector<double> v(static_cast<std::size_t>(size(rng)));
      for (double& x : v) x = std::round(scale * z(rng) * 20.0) / 20.0;  // coarse values force duplicates
      return EmpiricalMeasure::uniform(1, v);
    };
    const auto a = draw(), b = draw();
    const auto fast = bl_distance_line(a, b);
    const auto lp = bl_distance_transport(a, b);
    CHECK(fast.value == Approx(lp.value).margin(1e-9));
    check_optimizer(fast, Metric::euclidean());
  }
  CHECK_THROWS_AS(bl_distance_line(EmpiricalMeasure::dirac({0.0, 1.0}), EmpiricalMeasure::dirac({1.0, 1.0})),
                  InvalidArgument);
}

TEST_CASE("LP matches an assignment oracle") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> z(0.0, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(6), b(6);
    for (double& v : a) v = z(rng);
    for (double& v : b) v = z(rng) + 0.5;
    const auto r = bl_distance_transport(EmpiricalMeasure::uniform(1, a), EmpiricalMeasure::uniform(1, b));
    CHECK(r.value == Approx(assignment_oracle(a, b)).margin(1e-12));
    check_optimizer(r, Metric::euclidean());
    CHECK(bl_distance(EmpiricalMeasure::uniform(1, a), EmpiricalMeasure::uniform(1, b)).value ==
          Approx(r.value).margin(1e-12));
  }
}

TEST_CASE("metric axioms on random 4-point measures") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dim = 1 + trial % 3;
    const auto a = random_measure(rng, 4, dim, 1.5);
    const auto b = random_measure(rng, 4, dim, 1.5);
    const auto c = random_measure(rng, 4, dim, 1.5);
    const double ab = bl_distance(a, b).value, ba = bl_distance(b, a).value;
    const double bc = bl_distance(b, c).value, ac = bl_distance(a, c).value;
    CHECK(std::abs(ab - ba) < 1e-9);
    CHECK(ac <= ab + bc + 1e-8);
    CHECK(ab > 0.0);
    CHECK(ab <= 2.0);
    CHECK(bl_distance(a, a).value == 0.0);
    double maxd = 0.0;
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) maxd = std::max(maxd, a.metric()(a.point(i), b.point(j), dim));
    if (maxd <= 2.0) CHECK(ab <= maxd + 1e-12);
  }
}

TEST_CASE("duplicate atoms merge before comparison") {
  const auto split = line({1.0, 1.0, 2.0}, {0.25, 0.25, 0.5});
  const auto merged = line({2.0, 1.0}, {0.5, 0.5});
  CHECK(bl_distance(split, merged).value == 0.0);
  CHECK(split.coalesced().size() == 2);
}

TEST_CASE("mixture bound") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> lam(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const auto m1 = random_measure(rng, 3, 2, 2.0), n1 = random_measure(rng, 4, 2, 2.0);
    const auto m2 = random_measure(rng, 5, 2, 2.0), n2 = random_measure(rng, 2, 2, 2.0);
    const double l = lam(rng);
    const double lhs = bl_distance(EmpiricalMeasure::mixture(l, m1, m2), EmpiricalMeasure::mixture(l, n1, n2)).value;
    CHECK(lhs <= l * bl_distance(m1, n1).value + (1.0 - l) * bl_distance(m2, n2).value + 1e-9);
  }
}

TEST_CASE("block metrics") {
  const double a[] = {0.0, 0.0, 1.0, 1.0};
  const double b[] = {3.0, 4.0, 1.0, 2.0};
  CHECK(Metric::euclidean()(a, b, 4) == Approx(std::sqrt(26.0)));
  CHECK(Metric::max_block(2)(a, b, 4) == Approx(5.0));
  CHECK(Metric::max_block(1)(a, b, 4) == Approx(4.0));

  // Offsets -2..2 in steps of 1 for a scalar path.
  const auto w = Metric::weighted_window({-2, -1, 0, 1, 2}, 1, 3);
  const double x[] = {0, 0, 0, 0, 0};
  const double y[] = {5, 0, 0.25, 0.5, 0};
  // Levels: |s| <= 1 sup 0.5, |s| <= 2 sup 5 -> 1, |s| <= 3 same.
  CHECK(w(x, y, 5) == Approx(0.5 * 0.5 + 0.25 * 1.0 + 0.125 * 1.0));
  CHECK_THROWS_AS(EmpiricalMeasure(3, {0, 0, 0}, {1.0}, w), ShapeMismatch);
}

TEST_CASE("weights are validated") {
  CHECK_THROWS_AS(line({0, 1}, {0.5, 0.6}), InvalidArgument);
  CHECK_THROWS_AS(line({0, 1}, {-0.5, 1.5}), InvalidArgument);
  CHECK_THROWS_AS(EmpiricalMeasure(2, {0, 1, 2}, {1.0}), ShapeMismatch);
  std::vector<double> many(100000, 0.0);
  CHECK_NOTHROW(EmpiricalMeasure::uniform(1, many));
}

TEST_CASE("columnar csv round trip") {
  const EmpiricalMeasure m(2, {0.1, -3.25, 1e-17, 4.0}, {0.3, 0.7});
  std::stringstream ss;
  m.write_csv(ss);
  CHECK(ss.str().rfind("x0,x1,weight\n", 0) == 0);
  const auto back = EmpiricalMeasure::read_csv(ss);
  CHECK(back.coords() == m.coords());
  CHECK(back.weights() == m.weights());
}

TEST_CASE("uniform integrability profile") {
  const std::vector<std::vector<double>> bounded{{0.5, -1.0, 0.9}, {1.0, 0.0}};
  const auto b = uniform_integrability_profile(bounded, 2.0, {0.0, 1.0, 2.0});
  CHECK(b.values[0] == Approx(2.06 / 3.0));  // max of (1 + 0) / 2 and (0.25 + 1 + 0.81) / 3
  CHECK(b.values[1] == 0.0);
  CHECK(b.values[2] == 0.0);

  std::mt19937_64 rng(2024);
  std::normal_distribution<double> z;
  std::vector<double> s(100000);
  for (double& v : s) v = z(rng);
  const auto g = uniform_integrability_profile({s}, 2.0, {0.0, 3.0});
  // Oracle: 2 * integral over [3, 12] of z^2 phi(z), composite Simpson.
  const int n = 20000;
  const double h = 9.0 / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = 3.0 + i * h;
    acc += t * t * normal_pdf(t) * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
  }
  const double tail = 2.0 * acc * h / 3.0;
  CHECK(tail == Approx(0.029290).margin(1e-5));
  // Standard error of the tail mean from the sample itself.
  double m2 = 0.0;
  for (double v : s)
    if (std::abs(v) > 3.0) m2 += std::pow(v, 4);
  const double se = std::sqrt((m2 / s.size() - tail * tail) / s.size());
  CHECK(std::abs(g.values[1] - tail) <= 3.0 * se);
  const double var = std::inner_product(s.begin(), s.end(), s.begin(), 0.0) / s.size();
  CHECK(g.values[0] == Approx(var).epsilon(1e-12));
  CHECK(g.values[0] == Approx(1.0).margin(0.015));

  const auto em = uniform_integrability_profile(std::vector<EmpiricalMeasure>{line({-2.0, 1.0}, {0.5, 0.5})}, 1.0, {1.5});
  CHECK(em.values[0] == Approx(1.0));
}

TEST_CASE("desk-scale transport size") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> z;
  std::vector<double> a(500), b(500);
  for (double& v : a) v = z(rng);
  for (double& v : b) v = z(rng);
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = bl_distance_transport(EmpiricalMeasure::uniform(1, a), EmpiricalMeasure::uniform(1, b));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(r.value > 0.0);
  CHECK(r.value < 0.3);
  CHECK(std::abs(r.duality_gap) < 1e-9);
  CHECK(bl_distance(EmpiricalMeasure::uniform(1, a), EmpiricalMeasure::uniform(1, b)).value ==
        Approx(r.value).margin(1e-9));
  WARN("500x500 transport: " << secs << " s");
}

TEST_CASE("tightness modulus") {
  PathEnsemble flat(TimeGrid{0.0, 0.1, 40}, 1, 5, 0, "flat");
  const auto t0 = tightness_modulus(flat, 0.0, 2.0, {0.2, 1.0}, 0.1, {0.0, 1.0});
  for (const auto& row : t0.values)
    for (double v : row) CHECK(v == 0.0);

  PathEnsemble drift(TimeGrid{0.0, 0.1, 40}, 1, 3, 0, "drift");
  for (std::size_t m = 0; m < 3; ++m)
    for (std::size_t j = 0; j <= 40; ++j) drift.at(m, j) = drift.grid().time(j);
  const auto td = tightness_modulus(drift, 0.0, 2.0, {1.0}, 0.5, {0.0, 2.0});
  CHECK(td.values[0][0] == 1.0);
  CHECK(td.values[0][1] == 1.0);
  // pairs at spacing < 0.5 never exceed 0.5
  CHECK(tightness_modulus(drift, 0.0, 2.0, {0.5}, 0.5, {0.0}).values[0][0] == 0.0);

  const auto ou = simulate_ou({1.0, 1.0}, {0.0, 0.002, 3000}, 4000, 77);
  const auto t = tightness_modulus(ou, 0.0, 1.0, {0.01, 0.05, 0.2}, 0.5, {0.0, 2.0, 4.0});
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(t.values[0][k] < 0.05);
    CHECK(t.values[0][k] <= t.values[1][k]);
    CHECK(t.values[1][k] <= t.values[2][k]);
  }
  for (std::size_t i = 0; i < 3; ++i) {
    const double p = t.values[i][0];
    const double se = std::sqrt(std::max(p * (1 - p), 1e-4) / 4000.0);
    for (std::size_t k = 1; k < 3; ++k) CHECK(std::abs(t.values[i][k] - p) < 3 * std::sqrt(2.0) * se);
  }
  CHECK_THROWS_AS(tightness_modulus(ou, 0.0, 1.0, {0.001}, 0.5, {0.0}), InvalidArgument);
  CHECK_THROWS_AS(tightness_modulus(ou, 0.0, 1.0, {0.01}, 0.5, {5.5}), OutOfRange);
}
