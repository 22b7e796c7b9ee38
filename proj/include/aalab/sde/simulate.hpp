#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "aalab/core/error.hpp"
#include "aalab/core/parallel.hpp"
#include "aalab/processes/ensemble.hpp"
#include "aalab/processes/ou.hpp"
#include "aalab/sde/model.hpp"

namespace aalab {

inline constexpr double kBlowUpNorm = 1e6;

namespace detail {

// Exponential-Euler weights for one step of size h.
struct StepWeights {
  std::vector<double> decay;  // e^{-delta_i h}
  std::vector<double> drift;  // (1 - e^{-delta_i h}) / delta_i

  StepWeights(const SdeModel& m, double h) {
    for (double d : m.decays) {
      decay.push_back(std::exp(-d * h));
      drift.push_back(-std::expm1(-d * h) / d);
    }
  }
};

// y_next = e^{-delta h} y + w f(t, x) + e^{-delta h} g(t, x) dw
inline void mild_step(const SdeModel& m, const StepWeights& w, double t, const double* x, const double* y,
                      const double* dw, double* y_next) {
  const std::span<const double> xs(x, m.dim);
  const std::size_t q = m.noise_dim();
  for (std::size_t i = 0; i < m.dim; ++i) {
    double noise = 0.0;
    for (std::size_t c = 0; c < q; ++c)
      if (dw[c] != 0.0) noise += m.g[i * q + c](t, xs) * dw[c];
    y_next[i] = w.decay[i] * (y[i] + noise) + w.drift[i] * m.f[i](t, xs);
  }
}

inline double norm(const double* x, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) s += x[i] * x[i];
  return std::sqrt(s);
}

}  // namespace detail

struct MildOptions {
  std::size_t record_stride = 1;   // keep every k-th grid point
  std::string generator_id = "wiener";
};

struct MildSolution {
  PathEnsemble paths;
  double burn_in = 0.0;
  double sup_norm = 0.0;    // largest ||x|| seen after burn-in
  double bias_bound = 0.0;  // K (1 + sup ||x||) e^{-delta burn_in} / delta
  std::vector<std::string> warnings;

  nlohmann::json to_json() const {
    return {{"burn_in", burn_in}, {"sup_norm", sup_norm}, {"bias_bound", bias_bound}, {"warnings", warnings}};
  }
};

/// Exponential-Euler approximation of the mild solution on `grid`, started
/// at 0 at time grid.t0 - burn_in. The simulation step is grid.h; the
/// returned ensemble keeps every record_stride-th point. Path m draws its
/// noise from BrownianStream(seed, generator_id, m), so runs with the same
/// seed and id share one noise realization.
inline MildSolution simulate_mild(const SdeModel& model, const TimeGrid& grid, double burn_in, std::size_t paths,
                                  std::uint64_t seed, const MildOptions& opt = {}) {
  model.validate();
  grid.validate();
  const double delta = model.delta();
  if (!(burn_in >= 10.0 / delta - 1e-12)) throw InvalidArgument("burn-in must be at least 10/delta");
  if (opt.record_stride == 0 || grid.n % opt.record_stride != 0)
    throw InvalidArgument("record stride must divide the number of grid steps");
  const auto burn_steps = static_cast<std::size_t>(std::ceil(burn_in / grid.h - 1e-9));
  const double start = grid.t0 - static_cast<double>(burn_steps) * grid.h;
  const TimeGrid rec{grid.t0, grid.h * static_cast<double>(opt.record_stride), grid.n / opt.record_stride};

  MildSolution out{PathEnsemble(rec, model.dim, paths, seed, opt.generator_id), static_cast<double>(burn_steps) * grid.h,
                   0.0, 0.0, {}};
  if (!(theta_prime(model) < 1.0)) out.warnings.push_back("theta' >= 1: uniqueness/AA hypotheses not satisfied");

  const detail::StepWeights w(model, grid.h);
  std::vector<double> sup(paths, 0.0);
  parallel::for_each_index(paths, [&](std::size_t m) {
    BrownianStream noise(seed, opt.generator_id, m, model.noise_variances, grid.h);
    std::vector<double> x(model.dim, 0.0), next(model.dim), dw(model.noise_dim());
    const std::size_t total = burn_steps + grid.n;
    for (std::size_t k = 0;; ++k) {
      if (k >= burn_steps) {
        const std::size_t j = k - burn_steps;
        const double nrm = detail::norm(x.data(), model.dim);
        sup[m] = std::max(sup[m], nrm);
        if (j % opt.record_stride == 0) std::copy(x.begin(), x.end(), out.paths.state(m, j / opt.record_stride));
      }
      if (k == total) break;
      noise.next(dw.data());
      const double t = start + static_cast<double>(k) * grid.h;
      detail::mild_step(model, w, t, x.data(), x.data(), dw.data(), next.data());
      x.swap(next);
      const double nrm = detail::norm(x.data(), model.dim);
      if (!(nrm <= kBlowUpNorm))
        throw SimulationDiverged("path " + std::to_string(m) + " reached norm " + std::to_string(nrm) + " at t=" +
                                 std::to_string(t + grid.h) + " (step " + std::to_string(k + 1) + ")");
    }
  });
  out.sup_norm = *std::max_element(sup.begin(), sup.end());
  out.bias_bound = model.k() * (1.0 + out.sup_norm) * std::exp(-delta * out.burn_in) / delta;
  return out;
}

/// Discretized operator L applied pathwise to `current`, with the convolutions
/// truncated at the grid start.
inline PathEnsemble picard_step(const SdeModel& model, const PathEnsemble& current, const IncrementBlock& increments) {
  model.validate();
  if (!(current.grid() == increments.grid) || current.paths() != increments.paths || current.dim() != model.dim ||
      increments.components != model.noise_dim())
    throw ShapeMismatch("picard_step: path ensemble, increments and model disagree in shape");
  PathEnsemble out(current.grid(), model.dim, current.paths(), current.seed(), "picard");
  const detail::StepWeights w(model, current.grid().h);
  parallel::for_each_index(current.paths(), [&](std::size_t m) {
    std::fill(out.state(m, 0), out.state(m, 0) + model.dim, 0.0);
    for (std::size_t j = 0; j < current.grid().n; ++j)
      detail::mild_step(model, w, current.grid().time(j), current.state(m, j), out.state(m, j), increments.step(m, j),
                        out.state(m, j + 1));
  });
  return out;
}

struct ContractionReport {
  std::vector<double> sup_differences;  // sup over grid of E||X_{k+1} - X_k||^2, k = 0, 1, ...
  std::vector<double> ratios;           // sup_differences[k] / sup_differences[k-1]
  bool converged = false;               // a difference fell below the floor; list truncated there
  double theta = 0.0;
  double slack = 0.2;

  /// Ratios from the second half of the sequence.
  std::vector<double> tail() const {
    return {ratios.begin() + static_cast<std::ptrdiff_t>(ratios.size() / 2), ratios.end()};
  }
  double max_tail_ratio() const {
    const auto t = tail();
    return t.empty() ? 0.0 : *std::max_element(t.begin(), t.end());
  }
  bool within(double bound) const { return max_tail_ratio() <= bound * (1.0 + slack); }

  nlohmann::json to_json() const {
    return {{"sup_differences", sup_differences}, {"ratios", ratios}, {"converged", converged}, {"theta", theta},
            {"slack", slack}, {"max_tail_ratio", max_tail_ratio()}};
  }
};

struct ContractionOptions {
  std::size_t iterations = 8;
  std::string generator_id = "wiener";
  double floor = 1e-28;   // differences below this count as converged
  double slack = 0.2;
  std::size_t block = 32;  // fixed path blocks keep the reduction order thread-independent
};

/// Runs X_{k+1} = L X_k from X_0 = 0 with one fixed noise realization
/// (burn-in lies inside `grid`) and measures the contraction of
/// sup-grid E||X_{k+1} - X_k||^2. Paths are processed one at a time so only
/// per-grid-point accumulators are kept.
inline ContractionReport contraction_rate(const SdeModel& model, const TimeGrid& grid, std::size_t paths,
                                          std::uint64_t seed, const ContractionOptions& opt = {}) {
  model.validate();
  grid.validate();
  if (opt.iterations == 0 || paths == 0 || opt.block == 0) throw InvalidArgument("contraction_rate: need iterations and paths");
  const std::size_t np = grid.points(), d = model.dim, q = model.noise_dim();
  const std::size_t blocks = (paths + opt.block - 1) / opt.block;
  std::vector<std::vector<double>> acc(blocks);
  const detail::StepWeights w(model, grid.h);

  parallel::for_each_index(blocks, [&](std::size_t b) {
    auto& a = acc[b];
    a.assign(opt.iterations * np, 0.0);
    std::vector<double> dw(grid.n * q), prev(np * d), next(np * d);
    for (std::size_t m = b * opt.block; m < std::min(paths, (b + 1) * opt.block); ++m) {
      BrownianStream noise(seed, opt.generator_id, m, model.noise_variances, grid.h);
      for (std::size_t j = 0; j < grid.n; ++j) noise.next(dw.data() + j * q);
      std::fill(prev.begin(), prev.end(), 0.0);
      for (std::size_t k = 0; k < opt.iterations; ++k) {
        std::fill(next.begin(), next.begin() + static_cast<std::ptrdiff_t>(d), 0.0);
        for (std::size_t j = 0; j < grid.n; ++j)
          detail::mild_step(model, w, grid.time(j), prev.data() + j * d, next.data() + j * d, dw.data() + j * q,
                            next.data() + (j + 1) * d);
        for (std::size_t j = 0; j < np; ++j) {
          double s = 0.0;
          for (std::size_t i = 0; i < d; ++i) {
            const double diff = next[j * d + i] - prev[j * d + i];
            s += diff * diff;
          }
          a[k * np + j] += s;
        }
        prev.swap(next);
      }
    }
  });

  ContractionReport rep;
  rep.theta = theta(model);
  rep.slack = opt.slack;
  for (std::size_t k = 0; k < opt.iterations; ++k) {
    double sup = 0.0;
    for (std::size_t j = 0; j < np; ++j) {
      double s = 0.0;
      for (std::size_t b = 0; b < blocks; ++b) s += acc[b][k * np + j];
      sup = std::max(sup, s / static_cast<double>(paths));
    }
    rep.sup_differences.push_back(sup);
    if (sup < opt.floor) {
      rep.converged = true;
      break;
    }
    if (k > 0) rep.ratios.push_back(sup / rep.sup_differences[k - 1]);
  }
  return rep;
}

}  // namespace aalab
