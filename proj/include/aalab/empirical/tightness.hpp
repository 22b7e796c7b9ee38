#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "aalab/core/error.hpp"
#include "aalab/core/expr.hpp"
#include "aalab/core/parallel.hpp"
#include "aalab/processes/ensemble.hpp"

namespace aalab {

/// values[i][k]: fraction of paths whose modulus of continuity on
/// [r_k + a, r_k + b] at scale deltas[i] exceeds eta.
struct TightnessTable {
  double eta = 0.0;
  double a = 0.0, b = 0.0;
  std::vector<double> deltas;
  std::vector<double> recenters;
  std::vector<std::vector<double>> values;

  double sup_over_recenters(std::size_t i) const { return *std::max_element(values[i].begin(), values[i].end()); }

  void write_csv(std::ostream& os) const {
    os << "delta,r,value\n";
    for (std::size_t i = 0; i < deltas.size(); ++i)
      for (std::size_t k = 0; k < recenters.size(); ++k)
        os << detail::fmt_num(deltas[i]) << ',' << detail::fmt_num(recenters[k]) << ',' << detail::fmt_num(values[i][k])
           << '\n';
  }
  nlohmann::json to_json() const {
    return {{"eta", eta}, {"window", {a, b}}, {"deltas", deltas}, {"recenters", recenters}, {"values", values}};
  }
};

inline TightnessTable tightness_modulus(const PathEnsemble& ens, double a, double b, const std::vector<double>& deltas,
                                        double eta, const std::vector<double>& recenters) {
  const TimeGrid& g = ens.grid();
  if (!(b > a)) throw InvalidArgument("tightness window needs a < b");
  if (!(eta > 0.0)) throw InvalidArgument("tightness eta must be positive");
  if (recenters.empty() || deltas.empty()) throw InvalidArgument("tightness needs deltas and recenters");
  std::vector<std::size_t> reach;  // largest index gap k with k h < delta
  for (double d : deltas) {
    if (!(d > g.h * (1.0 + 1e-9))) throw InvalidArgument("tightness delta must exceed the grid step");
    reach.push_back(static_cast<std::size_t>(std::ceil(d / g.h - 1e-9)) - 1);
  }
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (double r : recenters) spans.emplace_back(g.index_of(r + a), g.index_of(r + b));

  TightnessTable out{eta, a, b, deltas, recenters, {}};
  out.values.assign(deltas.size(), std::vector<double>(recenters.size(), 0.0));
  const std::size_t dim = ens.dim();
  // exceeds[m][(i, k)] in per-path slots, reduced serially.
  std::vector<unsigned char> exceeds(ens.paths() * deltas.size() * recenters.size(), 0);
  parallel::for_each_index(ens.paths(), [&](std::size_t m) {
    for (std::size_t k = 0; k < spans.size(); ++k) {
      const auto [lo, hi] = spans[k];
      for (std::size_t i = 0; i < deltas.size(); ++i) {
        bool hit = false;
        for (std::size_t p = lo; p <= hi && !hit; ++p) {
          const double* x = ens.state(m, p);
          for (std::size_t q = p + 1; q <= std::min(hi, p + reach[i]) && !hit; ++q) {
            const double* y = ens.state(m, q);
            double s = 0.0;
            for (std::size_t c = 0; c < dim; ++c) s += (x[c] - y[c]) * (x[c] - y[c]);
            hit = std::sqrt(s) > eta;
          }
        }
        exceeds[(m * deltas.size() + i) * recenters.size() + k] = hit;
      }
    }
  });
  for (std::size_t m = 0; m < ens.paths(); ++m)
    for (std::size_t i = 0; i < deltas.size(); ++i)
      for (std::size_t k = 0; k < recenters.size(); ++k) out.values[i][k] += exceeds[(m * deltas.size() + i) * recenters.size() + k];
  for (auto& row : out.values)
    for (double& v : row) v /= static_cast<double>(ens.paths());
  return out;
}

}  // namespace aalab
