#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "aalab/core/error.hpp"
#include "aalab/core/parallel.hpp"
#include "aalab/processes/ensemble.hpp"
#include "aalab/processes/philox.hpp"

namespace aalab {

/// Stationary OU: dX = -alpha X dt + sqrt(2 alpha) sigma dW, Var X = sigma^2.
struct OuParams {
  double alpha = 1.0;
  double sigma = 1.0;

  void validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("OU alpha must be positive");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("OU sigma must be positive");
  }
  double decay(double h) const { return std::exp(-alpha * h); }
  double step_variance(double h) const { return sigma * sigma * -std::expm1(-2.0 * alpha * h); }
};

/// Exact transition, stationary start; path m uses NormalStream(seed, id, m).
inline PathEnsemble simulate_ou(const OuParams& params, const TimeGrid& grid, std::size_t paths, std::uint64_t seed,
                                const std::string& generator_id = "ou") {
  params.validate();
  PathEnsemble ens(grid, 1, paths, seed, generator_id);
  const double a = params.decay(grid.h);
  const double s = std::sqrt(params.step_variance(grid.h));
  parallel::for_each_index(paths, [&](std::size_t m) {
    NormalStream z(seed, generator_id, m);
    double x = params.sigma * z.next();
    ens.at(m, 0) = x;
    for (std::size_t j = 1; j <= grid.n; ++j) {
      x = a * x + s * z.next();
      ens.at(m, j) = x;
    }
  });
  return ens;
}

/// Per-path Wiener increments over a grid, one component per entry of
/// `variances` (their sum is Tr Q). Step j fills dw[c] ~ N(0, variances[c] h).
class BrownianStream {
 public:
  BrownianStream(std::uint64_t seed, const std::string& generator_id, std::size_t path, const std::vector<double>& variances,
                 double h)
      : z_(seed, generator_id, path) {
    if (!(h > 0.0)) throw InvalidArgument("increment step must be positive");
    for (double v : variances) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("noise component variances must be nonnegative and finite");
      sd_.push_back(std::sqrt(v * h));
    }
  }

  std::size_t components() const { return sd_.size(); }

  void next(double* dw) {
    for (std::size_t c = 0; c < sd_.size(); ++c) dw[c] = sd_[c] * z_.next();
  }

 private:
  NormalStream z_;
  std::vector<double> sd_;
};

/// Increments for steps j = 0..n-1 stored as value(m, j, c).
struct IncrementBlock {
  TimeGrid grid;
  std::size_t paths = 0;
  std::size_t components = 0;
  std::vector<double> data;

  double at(std::size_t m, std::size_t j, std::size_t c = 0) const { return data[(m * grid.n + j) * components + c]; }
  const double* step(std::size_t m, std::size_t j) const { return data.data() + (m * grid.n + j) * components; }
};

inline IncrementBlock brownian_increments(const TimeGrid& grid, std::size_t paths, const std::vector<double>& variances,
                                          std::uint64_t seed, const std::string& generator_id = "bm") {
  grid.validate();
  if (variances.empty()) throw InvalidArgument("need at least one noise component");
  IncrementBlock out{grid, paths, variances.size(), {}};
  out.data.assign(paths * grid.n * variances.size(), 0.0);
  parallel::for_each_index(paths, [&](std::size_t m) {
    BrownianStream w(seed, generator_id, m, variances, grid.h);
    for (std::size_t j = 0; j < grid.n; ++j) w.next(out.data.data() + (m * grid.n + j) * out.components);
  });
  return out;
}

}  // namespace aalab
