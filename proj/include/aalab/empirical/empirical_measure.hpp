#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "aalab/core/error.hpp"
#include "aalab/core/expr.hpp"
#include "aalab/core/quadrature.hpp"

namespace aalab {

/// Distance between points of R^dim.
///   euclidean        plain Euclidean norm;
///   max_block        points are k blocks of `block` coordinates; distance is
///                    the max over blocks of the Euclidean block distance;
///   weighted_window  points are paths sampled at `offsets` (each sample a
///                    block); distance is sum_{k=1..k_max} 2^-k min(1, sup over
///                    |s| <= k of the block distance).
class Metric {
 public:
  enum class Kind { kEuclidean, kMaxBlock, kWeightedWindow };

  static Metric euclidean() { return Metric(); }
  static Metric max_block(std::size_t block) {
    if (block == 0) throw InvalidArgument("max_block metric needs block >= 1");
    Metric m;
    m.kind_ = Kind::kMaxBlock;
    m.block_ = block;
    return m;
  }
  static Metric weighted_window(std::vector<double> offsets, std::size_t block = 1, int k_max = 3) {
    if (block == 0 || offsets.empty() || k_max < 1 || k_max > kMaxLevels) throw InvalidArgument("weighted_window metric: bad shape");
    Metric m;
    m.kind_ = Kind::kWeightedWindow;
    m.block_ = block;
    m.k_max_ = k_max;
    for (double s : offsets) {
      const int level = std::max(1, static_cast<int>(std::ceil(std::abs(s) - 1e-12)));
      m.levels_.push_back(level);
    }
    m.offsets_ = std::move(offsets);
    return m;
  }

  Kind kind() const { return kind_; }
  std::size_t block() const { return block_; }
  int k_max() const { return k_max_; }
  const std::vector<double>& offsets() const { return offsets_; }

  std::string name() const {
    switch (kind_) {
      case Kind::kEuclidean: return "euclidean";
      case Kind::kMaxBlock: return "max_block";
      case Kind::kWeightedWindow: return "weighted_window";
    }
    return "?";
  }

  void check_dim(std::size_t dim) const {
    if (dim == 0) throw ShapeMismatch("points need dimension >= 1");
    if (kind_ == Kind::kMaxBlock && dim % block_ != 0)
      throw ShapeMismatch("max_block metric: dimension " + std::to_string(dim) + " not a multiple of block");
    if (kind_ == Kind::kWeightedWindow && dim != offsets_.size() * block_)
      throw ShapeMismatch("weighted_window metric: dimension does not match offsets x block");
  }

  double operator()(const double* a, const double* b, std::size_t dim) const {
    switch (kind_) {
      case Kind::kEuclidean: return block_norm(a, b, dim);
      case Kind::kMaxBlock: {
        double m = 0.0;
        for (std::size_t i = 0; i < dim; i += block_) m = std::max(m, block_norm(a + i, b + i, block_));
        return m;
      }
      case Kind::kWeightedWindow: {
        double sup[kMaxLevels + 1] = {};
        for (std::size_t j = 0; j < offsets_.size(); ++j) {
          if (levels_[j] > k_max_) continue;
          const double d = block_norm(a + j * block_, b + j * block_, block_);
          sup[levels_[j]] = std::max(sup[levels_[j]], d);
        }
        double total = 0.0, running = 0.0, w = 1.0;
        for (int k = 1; k <= k_max_; ++k) {
          running = std::max(running, sup[k]);
          w *= 0.5;
          total += w * std::min(1.0, running);
        }
        return total;
      }
    }
    return 0.0;
  }

  bool operator==(const Metric& o) const {
    return kind_ == o.kind_ && block_ == o.block_ && k_max_ == o.k_max_ && offsets_ == o.offsets_;
  }

  nlohmann::json to_json() const {
    nlohmann::json j{{"kind", name()}, {"block", block_}};
    if (kind_ == Kind::kWeightedWindow) {
      j["k_max"] = k_max_;
      j["offsets"] = offsets_;
    }
    return j;
  }

 private:
  static constexpr int kMaxLevels = 16;

  static double block_norm(const double* a, const double* b, std::size_t n) {
    if (n == 1) return std::abs(a[0] - b[0]);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
  }

  Kind kind_ = Kind::kEuclidean;
  std::size_t block_ = 1;
  int k_max_ = 3;
  std::vector<double> offsets_;
  std::vector<int> levels_;
};

/// Finitely supported probability measure: `size()` atoms of dimension
/// `dim()`, stored row-major.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure(std::size_t dim, std::vector<double> coords, std::vector<double> weights,
                   Metric metric = Metric::euclidean())
      : dim_(dim), coords_(std::move(coords)), weights_(std::move(weights)), metric_(std::move(metric)) {
    metric_.check_dim(dim_);
    if (coords_.size() != dim_ * weights_.size()) throw ShapeMismatch("coordinates do not match dim x atoms");
    if (weights_.empty()) throw InvalidArgument("empirical measure needs at least one atom");
    CompensatedSum total;
    for (double w : weights_) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("weights must be nonnegative and finite");
      total.add(w);
    }
    const double s = total.value();
    if (std::abs(s - 1.0) > 1e-12) throw InvalidArgument("weights must sum to 1 (got " + detail::fmt_num(s) + ")");
    for (double c : coords_)
      if (!std::isfinite(c)) throw InvalidArgument("atom coordinates must be finite");
  }

  /// Unit-weight atoms (weight 1/n each).
  static EmpiricalMeasure uniform(std::size_t dim, std::vector<double> coords, Metric metric = Metric::euclidean()) {
    if (dim == 0 || coords.size() % dim != 0 || coords.empty())
      throw ShapeMismatch("uniform empirical measure: coordinates do not split into atoms");
    const std::size_t n = coords.size() / dim;
    return EmpiricalMeasure(dim, std::move(coords), std::vector<double>(n, 1.0 / static_cast<double>(n)),
                            std::move(metric));
  }

  static EmpiricalMeasure dirac(std::vector<double> point, Metric metric = Metric::euclidean()) {
    const std::size_t d = point.size();
    return EmpiricalMeasure(d, std::move(point), {1.0}, std::move(metric));
  }

  /// lambda * a + (1 - lambda) * b
  static EmpiricalMeasure mixture(double lambda, const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("mixture weight must lie in [0, 1]");
    if (a.dim_ != b.dim_ || !(a.metric_ == b.metric_)) throw ShapeMismatch("mixture of incompatible measures");
    std::vector<double> coords = a.coords_;
    coords.insert(coords.end(), b.coords_.begin(), b.coords_.end());
    std::vector<double> w;
    for (double x : a.weights_) w.push_back(lambda * x);
    for (double x : b.weights_) w.push_back((1.0 - lambda) * x);
    double s = 0.0;
    for (double x : w) s += x;
    for (double& x : w) x /= s;
    return EmpiricalMeasure(a.dim_, std::move(coords), std::move(w), a.metric_);
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return weights_.size(); }
  const double* point(std::size_t i) const { return coords_.data() + i * dim_; }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& coords() const { return coords_; }
  const std::vector<double>& weights() const { return weights_; }
  const Metric& metric() const { return metric_; }

  double distance(std::size_t i, std::size_t j) const { return metric_(point(i), point(j), dim_); }

  /// Merges atoms closer than `eps` (greedy, in atom order).
  EmpiricalMeasure coalesced(double eps = 1e-9) const {
    std::vector<std::size_t> reps;
    std::vector<double> w;
    for (std::size_t i = 0; i < size(); ++i) {
      bool merged = false;
      for (std::size_t r = 0; r < reps.size(); ++r) {
        if (distance(reps[r], i) < eps) {
          w[r] += weights_[i];
          merged = true;
          break;
        }
      }
      if (!merged) {
        reps.push_back(i);
        w.push_back(weights_[i]);
      }
    }
    std::vector<double> coords;
    for (std::size_t r : reps) coords.insert(coords.end(), point(r), point(r) + dim_);
    return EmpiricalMeasure(dim_, std::move(coords), std::move(w), metric_);
  }

  /// Columns x0..x{dim-1}, weight.
  void write_csv(std::ostream& os) const {
    for (std::size_t c = 0; c < dim_; ++c) os << 'x' << c << ',';
    os << "weight\n";
    for (std::size_t i = 0; i < size(); ++i) {
      for (std::size_t c = 0; c < dim_; ++c) os << detail::fmt_num(point(i)[c]) << ',';
      os << detail::fmt_num(weights_[i]) << '\n';
    }
  }

  static EmpiricalMeasure read_csv(std::istream& is, Metric metric = Metric::euclidean()) {
    std::string line;
    if (!std::getline(is, line)) throw InvalidArgument("empirical measure csv: missing header");
    const auto cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
    if (cols < 2) throw InvalidArgument("empirical measure csv: need coordinates and a weight column");
    std::vector<double> coords, weights;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string cell;
      std::size_t c = 0;
      while (std::getline(ss, cell, ',')) {
        double v = 0.0;
        try {
          v = std::stod(cell);
        } catch (const std::exception&) {
          throw InvalidArgument("empirical measure csv: bad number '" + cell + "'");
        }
        (c + 1 < cols ? coords : weights).push_back(v);
        ++c;
      }
      if (c != cols) throw ShapeMismatch("empirical measure csv: ragged row");
    }
    return EmpiricalMeasure(cols - 1, std::move(coords), std::move(weights), std::move(metric));
  }

 private:
  std::size_t dim_;
  std::vector<double> coords_;
  std::vector<double> weights_;
  Metric metric_;
};

}  // namespace aalab
