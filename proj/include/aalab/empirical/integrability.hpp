#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "aalab/core/error.hpp"
#include "aalab/core/quadrature.hpp"
#include "aalab/empirical/empirical_measure.hpp"

namespace aalab {

struct UIProfile {
  double p = 2.0;
  std::vector<double> cutoffs;
  std::vector<double> values;  // sup over marginals of E[|x|^p 1{|x| > c}]

  void write_csv(std::ostream& os) const {
    os << "cutoff,value\n";
    for (std::size_t i = 0; i < cutoffs.size(); ++i)
      os << detail::fmt_num(cutoffs[i]) << ',' << detail::fmt_num(values[i]) << '\n';
  }
  nlohmann::json to_json() const { return {{"p", p}, {"cutoffs", cutoffs}, {"values", values}}; }
};

namespace detail {
inline void check_ui_args(double p, const std::vector<double>& cutoffs) {
  if (!(p > 0.0) || !std::isfinite(p)) throw InvalidArgument("uniform integrability: p must be positive");
  for (double c : cutoffs)
    if (!(c >= 0.0)) throw InvalidArgument("uniform integrability: cutoffs must be nonnegative");
}
}  // namespace detail

/// Each inner list holds the raw sample norms of one marginal (equal weights).
inline UIProfile uniform_integrability_profile(const std::vector<std::vector<double>>& norms, double p,
                                               const std::vector<double>& cutoffs) {
  detail::check_ui_args(p, cutoffs);
  UIProfile out;
  out.p = p;
  out.cutoffs = cutoffs;
  for (double c : cutoffs) {
    double sup = 0.0;
    for (const auto& sample : norms) {
      if (sample.empty()) continue;
      CompensatedSum s;
      for (double x : sample) {
        const double a = std::abs(x);
        if (a > c) s.add(std::pow(a, p));
      }
      sup = std::max(sup, s.value() / static_cast<double>(sample.size()));
    }
    out.values.push_back(sup);
  }
  return out;
}

/// Weighted version on empirical marginals; the norm is Euclidean over all
/// coordinates of an atom.
inline UIProfile uniform_integrability_profile(const std::vector<EmpiricalMeasure>& marginals, double p,
                                               const std::vector<double>& cutoffs) {
  detail::check_ui_args(p, cutoffs);
  UIProfile out;
  out.p = p;
  out.cutoffs = cutoffs;
  for (double c : cutoffs) {
    double sup = 0.0;
    for (const auto& m : marginals) {
      CompensatedSum s;
      for (std::size_t i = 0; i < m.size(); ++i) {
        double sq = 0.0;
        for (std::size_t k = 0; k < m.dim(); ++k) sq += m.point(i)[k] * m.point(i)[k];
        const double a = std::sqrt(sq);
        if (a > c) s.add(m.weight(i) * std::pow(a, p));
      }
      sup = std::max(sup, s.value());
    }
    out.values.push_back(sup);
  }
  return out;
}

}  // namespace aalab
