#pragma once

// Bounded-Lipschitz distance between finitely supported measures,
//   d_BL(mu, nu) = sup { sum_z f(z) (mu(z) - nu(z)) : |f| <= 1, |f(z) - f(z')| <= d(z, z') }.
// A function with |f| <= 1 and Lip(f) <= 1 is exactly (up to an additive
// constant) a 1-Lipschitz function for c = min(d, 2), so the LP is solved in
// its dual transport form with cost c by successive shortest paths; the
// optimizer f is recovered from the potentials through a c-transform.
// On the real line only consecutive Lipschitz constraints matter and the LP is
// solved exactly by a dynamic program over concave piecewise-linear value
// functions instead.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "aalab/core/error.hpp"
#include "aalab/core/quadrature.hpp"
#include "aalab/empirical/empirical_measure.hpp"

namespace aalab {

struct BLDistanceResult {
  double value = 0.0;
  std::string method = "lp";
  std::size_t dim = 0;
  std::vector<double> support;    // union support, row-major
  std::vector<double> excess;     // mu(z) - nu(z)
  std::vector<double> optimizer;  // f(z)
  double duality_gap = 0.0;       // transport cost minus sum f (mu - nu)

  nlohmann::json to_json() const {
    return {{"value", value}, {"method", method}, {"dim", dim}, {"support", support},
            {"excess", excess}, {"optimizer", optimizer}, {"duality_gap", duality_gap}};
  }
};

namespace detail {

struct UnionSupport {
  std::size_t dim = 0;
  std::vector<double> coords;
  std::vector<double> excess;
  std::size_t size() const { return excess.size(); }
  const double* point(std::size_t i) const { return coords.data() + i * dim; }
};

/// Union of both supports with identical points merged.
inline UnionSupport union_support(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  if (mu.dim() != nu.dim()) throw ShapeMismatch("bl_distance: dimension mismatch");
  if (!(mu.metric() == nu.metric())) throw ShapeMismatch("bl_distance: metric mismatch");
  UnionSupport u;
  u.dim = mu.dim();
  std::map<std::vector<double>, std::size_t> index;
  auto add = [&](const EmpiricalMeasure& m, double sign) {
    for (std::size_t i = 0; i < m.size(); ++i) {
      std::vector<double> key(m.point(i), m.point(i) + m.dim());
      auto [it, fresh] = index.emplace(std::move(key), u.excess.size());
      if (fresh) {
        u.coords.insert(u.coords.end(), m.point(i), m.point(i) + m.dim());
        u.excess.push_back(0.0);
      }
      u.excess[it->second] += sign * m.weight(i);
    }
  };
  add(mu, 1.0);
  add(nu, -1.0);
  return u;
}

/// Min-cost transport from `supply` to `demand` (equal totals) with a dense
/// nonnegative cost matrix, by successive shortest paths with Dijkstra on
/// reduced costs. Returns the cost and the node potentials
/// (sources first, then sinks): c_ij + pi_i - pi_j >= 0, with equality on
/// every edge carrying flow.
struct TransportSolution {
  double cost = 0.0;
  std::vector<double> potential;
};

inline TransportSolution min_cost_transport(std::vector<double> supply, std::vector<double> demand,
                                            const std::vector<double>& cost) {
  const std::size_t S = supply.size(), T = demand.size(), V = S + T;
  const double inf = std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (double s : supply) total += s;
  const double eps = 1e-15 * std::max(1.0, total);

  std::vector<double> flow(S * T, 0.0), pi(V, 0.0), dist(V);
  std::vector<std::vector<std::size_t>> carriers(T);  // sources with flow into each sink
  std::vector<std::int64_t> parent(V);
  std::vector<char> done(V);
  std::vector<std::size_t> touched, open_sources;
  const std::size_t max_rounds = 4 * V * V + 16;
  std::size_t rounds = 0;

  // Sink potentials start at the cheapest incoming cost.
  for (std::size_t j = 0; j < T; ++j) {
    double m = inf;
    for (std::size_t i = 0; i < S; ++i) m = std::min(m, cost[i * T + j]);
    pi[S + j] = m;
  }

  for (std::size_t root = 0; root < S; ++root) {
    while (supply[root] > eps) {
      if (++rounds > max_rounds) throw InternalError("transport solver did not terminate");
      std::fill(dist.begin(), dist.end(), inf);
      std::fill(parent.begin(), parent.end(), -1);
      std::fill(done.begin(), done.end(), 0);
      touched.clear();
      open_sources.assign(1, root);
      dist[root] = 0.0;

      std::int64_t sink = -1;
      for (;;) {
        // Next node: cheapest open source or unfinished sink.
        std::size_t v = V;
        double best = inf;
        for (std::size_t i : open_sources)
          if (!done[i] && dist[i] < best) best = dist[i], v = i;
        for (std::size_t j = 0; j < T; ++j)
          if (!done[S + j] && dist[S + j] < best) best = dist[S + j], v = S + j;
        if (v == V) break;
        done[v] = 1;
        touched.push_back(v);
        if (v < S) {
          const double* row = cost.data() + v * T;
          for (std::size_t j = 0; j < T; ++j) {
            if (done[S + j]) continue;
            const double nd = dist[v] + std::max(0.0, row[j] + pi[v] - pi[S + j]);
            if (nd < dist[S + j]) dist[S + j] = nd, parent[S + j] = static_cast<std::int64_t>(v);
          }
        } else {
          const std::size_t j = v - S;
          if (demand[j] > eps) {
            sink = static_cast<std::int64_t>(v);
            break;
          }
          for (std::size_t i : carriers[j]) {
            if (done[i]) continue;
            const double nd = dist[v] + std::max(0.0, -cost[i * T + j] + pi[v] - pi[i]);
            if (nd < dist[i]) {
              if (dist[i] == inf) open_sources.push_back(i);
              dist[i] = nd, parent[i] = static_cast<std::int64_t>(v);
            }
          }
        }
      }
      if (sink < 0) throw InternalError("transport solver: no augmenting path (infeasible LP reported)");

      // Nodes left unfinished move by D; finished ones by their distance.
      const double D = dist[static_cast<std::size_t>(sink)];
      for (std::size_t k = 0; k < V; ++k) pi[k] += D;
      for (std::size_t k : touched) pi[k] += dist[k] - D;

      double delta = std::min(supply[root], demand[static_cast<std::size_t>(sink) - S]);
      std::size_t v = static_cast<std::size_t>(sink);
      while (parent[v] >= 0) {
        const auto u = static_cast<std::size_t>(parent[v]);
        if (u >= S) delta = std::min(delta, flow[v * T + (u - S)]);  // reverse edge sink u -> source v
        v = u;
      }
      v = static_cast<std::size_t>(sink);
      while (parent[v] >= 0) {
        const auto u = static_cast<std::size_t>(parent[v]);
        if (u < S) {
          double& fl = flow[u * T + (v - S)];
          if (fl <= eps) carriers[v - S].push_back(u);
          fl += delta;
        } else {
          double& fl = flow[v * T + (u - S)];
          fl -= delta;
          if (fl <= eps) {
            fl = 0.0;
            auto& c = carriers[u - S];
            c.erase(std::find(c.begin(), c.end(), v));
          }
        }
        v = u;
      }
      supply[root] -= delta;
      demand[static_cast<std::size_t>(sink) - S] -= delta;
    }
  }

  TransportSolution sol;
  CompensatedSum c;
  for (std::size_t k = 0; k < S * T; ++k)
    if (flow[k] > 0.0) c.add(flow[k] * cost[k]);
  sol.cost = c.value();
  sol.potential = std::move(pi);
  return sol;
}

/// max sum_i e_i f_i subject to |f_i| <= 1 and |f_{i+1} - f_i| <= gap_i, for
/// points sorted along the line. V_i(f), the best partial sum with f_i = f,
/// is concave piecewise linear on [-1, 1]; it is stored as knots and the
/// slopes between them.
struct LineSolution {
  double value = 0.0;
  std::vector<double> f;
};

inline LineSolution line_dp(const std::vector<double>& e, const std::vector<double>& gap) {
  const std::size_t n = e.size();
  std::vector<double> xs{-1.0, 1.0}, slopes{e[0]};
  double v0 = -e[0];  // V at the left end
  std::vector<double> peaks(n);
  auto peak_of = [](const std::vector<double>& s) {
    std::size_t p = 0;
    while (p < s.size() && s[p] > 0.0) ++p;
    return p;  // knot index of the maximum
  };
  for (std::size_t i = 0;; ++i) {
    const std::size_t p = peak_of(slopes);
    peaks[i] = xs[p];
    if (i + 1 == n) break;
    const double g = gap[i];
    // window maximum: rising part moves left by g, falling part right by g
    std::vector<double> nx, ns;
    for (std::size_t k = 0; k <= p; ++k) nx.push_back(xs[k] - g);
    for (std::size_t k = 0; k < p; ++k) ns.push_back(slopes[k]);
    if (g > 0.0) {
      nx.push_back(xs[p] + g);
      ns.push_back(0.0);
    }
    for (std::size_t k = p + 1; k < xs.size(); ++k) nx.push_back(xs[k] + g);
    for (std::size_t k = p; k < slopes.size(); ++k) ns.push_back(slopes[k]);
    // restrict to [-1, 1]
    double v = v0;
    std::size_t k = 0;
    while (k + 1 < nx.size() && nx[k + 1] <= -1.0) {
      v += ns[k] * (nx[k + 1] - nx[k]);
      ++k;
    }
    v += ns[k] * (-1.0 - nx[k]);
    xs.assign(1, -1.0);
    slopes.clear();
    for (std::size_t q = k; q < ns.size(); ++q) {
      const double right = std::min(nx[q + 1], 1.0);
      if (right > xs.back()) {
        xs.push_back(right);
        slopes.push_back(ns[q]);
      }
      if (right >= 1.0) break;
    }
    // add e_{i+1} f
    for (double& s : slopes) s += e[i + 1];
    v0 = v - e[i + 1];
  }
  LineSolution sol;
  double v = v0, best = v0;
  for (std::size_t k = 0; k < slopes.size(); ++k) {
    v += slopes[k] * (xs[k + 1] - xs[k]);
    best = std::max(best, v);
  }
  sol.value = best;
  sol.f.assign(n, 0.0);
  sol.f[n - 1] = peaks[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) sol.f[i] = std::clamp(peaks[i], sol.f[i + 1] - gap[i], sol.f[i + 1] + gap[i]);
  return sol;
}

}  // namespace detail

/// Exact d_BL through the transport dual, for any metric.
inline BLDistanceResult bl_distance_transport(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  const auto u = detail::union_support(mu, nu);
  const Metric& metric = mu.metric();
  const std::size_t n = u.size();
  const double tiny = 1e-15;

  std::vector<std::size_t> src, snk;
  std::vector<double> supply, demand;
  for (std::size_t k = 0; k < n; ++k) {
    if (u.excess[k] > tiny) src.push_back(k), supply.push_back(u.excess[k]);
    if (u.excess[k] < -tiny) snk.push_back(k), demand.push_back(-u.excess[k]);
  }

  BLDistanceResult res;
  res.dim = u.dim;
  res.support = u.coords;
  res.excess = u.excess;
  res.optimizer.assign(n, 0.0);
  if (src.empty() || snk.empty()) return res;

  // Supplies and demands agree up to rounding; rescale the smaller side.
  double ts = 0.0, td = 0.0;
  for (double s : supply) ts += s;
  for (double d : demand) td += d;
  for (double& d : demand) d *= ts / td;

  auto c = [&](std::size_t a, std::size_t b) { return std::min(metric(u.point(a), u.point(b), u.dim), 2.0); };
  std::vector<double> cost(src.size() * snk.size());
  for (std::size_t i = 0; i < src.size(); ++i)
    for (std::size_t j = 0; j < snk.size(); ++j) cost[i * snk.size() + j] = c(src[i], snk[j]);

  const auto sol = detail::min_cost_transport(supply, demand, cost);

  // c-transform of the sink potentials: f(z) = min_j c(z, y_j) - pi_j.
  std::vector<double> f(n);
  for (std::size_t z = 0; z < n; ++z) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < snk.size(); ++j) m = std::min(m, c(z, snk[j]) - sol.potential[src.size() + j]);
    f[z] = m;
  }
  const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
  const double mid = 0.5 * (*lo + *hi);
  CompensatedSum dual;
  for (std::size_t z = 0; z < n; ++z) {
    f[z] -= mid;
    dual.add(f[z] * u.excess[z]);
  }
  res.optimizer = std::move(f);
  res.value = std::clamp(sol.cost, 0.0, 2.0);
  res.duality_gap = sol.cost - dual.value();
  return res;
}

/// Exact d_BL for one-dimensional atoms under |x - y|, by the line dynamic program.
inline BLDistanceResult bl_distance_line(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  const auto u = detail::union_support(mu, nu);
  if (u.dim != 1 || mu.metric().kind() == Metric::Kind::kWeightedWindow)
    throw InvalidArgument("bl_distance_line needs one-dimensional atoms under |x - y|");
  const std::size_t n = u.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return u.coords[a] < u.coords[b]; });
  std::vector<double> e(n), gap(n > 0 ? n - 1 : 0);
  for (std::size_t i = 0; i < n; ++i) e[i] = u.excess[order[i]];
  for (std::size_t i = 0; i + 1 < n; ++i) gap[i] = u.coords[order[i + 1]] - u.coords[order[i]];
  BLDistanceResult res;
  res.method = "line";
  res.dim = 1;
  res.support = u.coords;
  res.excess = u.excess;
  res.optimizer.assign(n, 0.0);
  if (std::all_of(e.begin(), e.end(), [](double v) { return std::abs(v) <= 1e-15; })) return res;
  const auto sol = detail::line_dp(e, gap);
  CompensatedSum dual;
  for (std::size_t i = 0; i < n; ++i) {
    res.optimizer[order[i]] = sol.f[i];
    dual.add(sol.f[i] * e[i]);
  }
  res.value = std::clamp(sol.value, 0.0, 2.0);
  res.duality_gap = sol.value - dual.value();
  return res;
}

/// Exact d_BL; dispatches to the line program when it applies.
inline BLDistanceResult bl_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  if (mu.dim() == 1 && nu.dim() == 1 && mu.metric() == nu.metric() && mu.metric().kind() != Metric::Kind::kWeightedWindow)
    return bl_distance_line(mu, nu);
  return bl_distance_transport(mu, nu);
}

/// Brute-force d_BL for union supports of at most 3 points: f-values on the
/// grid {-1, -1 + step, ..., 1}, Lipschitz-feasible combinations only.
inline BLDistanceResult bl_distance_oracle(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                                           double step = 1e-3) {
  const auto u = detail::union_support(mu, nu);
  const std::size_t n = u.size();
  if (n > 3) throw InvalidArgument("bl_distance_oracle: union support exceeds 3 points");
  const auto g = static_cast<std::int64_t>(std::llround(1.0 / step));
  auto val = [&](std::int64_t k) { return static_cast<double>(k) / static_cast<double>(g); };
  std::vector<double> d(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) d[a * n + b] = mu.metric()(u.point(a), u.point(b), u.dim);

  BLDistanceResult res;
  res.method = "oracle";
  res.dim = u.dim;
  res.support = u.coords;
  res.excess = u.excess;
  res.optimizer.assign(n, 0.0);
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::int64_t> k(n, -g);
  // Enumerate all but the last value; the objective is linear in the last
  // one, so its best feasible grid value is an end of its feasible range.
  const std::size_t free_vars = n == 0 ? 0 : n - 1;
  for (;;) {
    bool feasible = true;
    for (std::size_t a = 0; a < free_vars && feasible; ++a)
      for (std::size_t b = a + 1; b < free_vars && feasible; ++b)
        if (std::abs(val(k[a]) - val(k[b])) > d[a * n + b] + 1e-12) feasible = false;
    if (feasible && n > 0) {
      const std::size_t l = n - 1;
      double lo = -1.0, hi = 1.0;
      for (std::size_t a = 0; a < l; ++a) {
        lo = std::max(lo, val(k[a]) - d[a * n + l]);
        hi = std::min(hi, val(k[a]) + d[a * n + l]);
      }
      const auto klo = static_cast<std::int64_t>(std::ceil(lo * static_cast<double>(g) - 1e-9));
      const auto khi = static_cast<std::int64_t>(std::floor(hi * static_cast<double>(g) + 1e-9));
      if (klo <= khi) {
        for (std::int64_t kl : {klo, khi}) {
          k[l] = kl;
          double obj = 0.0;
          for (std::size_t a = 0; a < n; ++a) obj += val(k[a]) * u.excess[a];
          if (obj > best) {
            best = obj;
            for (std::size_t a = 0; a < n; ++a) res.optimizer[a] = val(k[a]);
          }
        }
      }
    }
    std::size_t a = 0;
    while (a < free_vars && k[a] == g) k[a++] = -g;
    if (a == free_vars) break;
    ++k[a];
  }
  res.value = std::max(0.0, best);
  return res;
}

}  // namespace aalab
