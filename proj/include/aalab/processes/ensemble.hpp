#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "aalab/core/error.hpp"

namespace aalab {

/// Points t0 + j*h for j = 0..n.
struct TimeGrid {
  double t0 = 0.0;
  double h = 1.0;
  std::size_t n = 0;

  void validate() const {
    if (!(h > 0.0) || !std::isfinite(h) || !std::isfinite(t0)) throw InvalidArgument("time grid needs finite t0 and h > 0");
  }
  std::size_t points() const { return n + 1; }
  double time(std::size_t j) const { return t0 + static_cast<double>(j) * h; }
  double end() const { return time(n); }
  bool contains_index(long long j) const { return j >= 0 && static_cast<std::size_t>(j) <= n; }

  /// Index of a grid time; throws unless `t` sits on the grid.
  std::size_t index_of(double t) const {
    const double x = (t - t0) / h;
    const double r = std::round(x);
    if (std::abs(x - r) > 1e-6 || r < 0.0 || r > static_cast<double>(n))
      throw OutOfRange("time " + std::to_string(t) + " is not a grid point");
    return static_cast<std::size_t>(r);
  }

  bool operator==(const TimeGrid& o) const { return t0 == o.t0 && h == o.h && n == o.n; }
  nlohmann::json to_json() const { return {{"t0", t0}, {"h", h}, {"n", n}}; }
};

/// Metadata shared by an ensemble and its file header.
struct EnsembleHeader {
  TimeGrid grid;
  std::size_t dim = 1;
  std::size_t paths = 0;
  std::uint64_t seed = 0;
  std::string generator_id;

  bool operator==(const EnsembleHeader& o) const {
    return grid == o.grid && dim == o.dim && paths == o.paths && seed == o.seed && generator_id == o.generator_id;
  }
};

/// M sample paths on a grid, stored path-major: value(m, j, c).
class PathEnsemble {
 public:
  PathEnsemble(TimeGrid grid, std::size_t dim, std::size_t paths, std::uint64_t seed, std::string generator_id)
      : header_{grid, dim, paths, seed, std::move(generator_id)} {
    grid.validate();
    if (dim == 0 || paths == 0) throw InvalidArgument("ensemble needs dim >= 1 and at least one path");
    data_.assign(paths * grid.points() * dim, 0.0);
  }

  const TimeGrid& grid() const { return header_.grid; }
  std::size_t dim() const { return header_.dim; }
  std::size_t paths() const { return header_.paths; }
  std::uint64_t seed() const { return header_.seed; }
  const std::string& generator_id() const { return header_.generator_id; }
  const EnsembleHeader& header() const { return header_; }

  double& at(std::size_t m, std::size_t j, std::size_t c = 0) { return data_[offset(m, j, c)]; }
  double at(std::size_t m, std::size_t j, std::size_t c = 0) const { return data_[offset(m, j, c)]; }
  double* state(std::size_t m, std::size_t j) { return data_.data() + offset(m, j, 0); }
  const double* state(std::size_t m, std::size_t j) const { return data_.data() + offset(m, j, 0); }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const PathEnsemble& o) const {
    return header_.grid == o.header_.grid && header_.dim == o.header_.dim && header_.paths == o.header_.paths;
  }
  bool operator==(const PathEnsemble& o) const { return header_ == o.header_ && data_ == o.data_; }

 private:
  std::size_t offset(std::size_t m, std::size_t j, std::size_t c) const {
    return (m * header_.grid.points() + j) * header_.dim + c;
  }

  EnsembleHeader header_;
  std::vector<double> data_;
};

/// View of X(t_{offset} + .) on `count` grid points; no data is copied.
class EnsembleWindow {
 public:
  EnsembleWindow(const PathEnsemble& ens, long long offset, std::size_t count) : ens_(&ens), offset_(offset), count_(count) {
    if (count == 0) throw InvalidArgument("window needs at least one point");
    if (!ens.grid().contains_index(offset) || !ens.grid().contains_index(offset + static_cast<long long>(count) - 1))
      throw OutOfRange("window [" + std::to_string(offset) + ", +" + std::to_string(count) + ") leaves the grid");
  }

  std::size_t offset() const { return static_cast<std::size_t>(offset_); }
  std::size_t count() const { return count_; }
  std::size_t dim() const { return ens_->dim(); }
  std::size_t paths() const { return ens_->paths(); }
  double start_time() const { return ens_->grid().time(offset()); }

  double operator()(std::size_t m, std::size_t j, std::size_t c = 0) const { return ens_->at(m, offset() + j, c); }

  EnsembleWindow shifted(long long k) const { return EnsembleWindow(*ens_, offset_ + k, count_); }

  /// Explicit copy as a standalone ensemble on the window's grid.
  PathEnsemble copy() const {
    const TimeGrid g{start_time(), ens_->grid().h, count_ - 1};
    PathEnsemble out(g, dim(), paths(), ens_->seed(), ens_->generator_id());
    for (std::size_t m = 0; m < paths(); ++m)
      for (std::size_t j = 0; j < count_; ++j)
        for (std::size_t c = 0; c < dim(); ++c) out.at(m, j, c) = (*this)(m, j, c);
    return out;
  }

 private:
  const PathEnsemble* ens_;
  long long offset_;
  std::size_t count_;
};

/// Translation x -> x(t + .): the window starting `shift` points after
/// `window_begin`.
inline EnsembleWindow translate(const PathEnsemble& ens, long long shift, std::size_t window_begin,
                                std::size_t window_count) {
  return EnsembleWindow(ens, static_cast<long long>(window_begin) + shift, window_count);
}

/// Componentwise a + b on the same probability space (path m pairs with m).
inline PathEnsemble sum_process(const PathEnsemble& a, const PathEnsemble& b) {
  if (!a.same_shape(b)) throw ShapeMismatch("sum_process: ensembles differ in grid, dim or path count");
  PathEnsemble out(a.grid(), a.dim(), a.paths(), a.seed(), a.generator_id() + "+" + b.generator_id());
  for (std::size_t m = 0; m < a.paths(); ++m)
    for (std::size_t j = 0; j < a.grid().points(); ++j)
      for (std::size_t c = 0; c < a.dim(); ++c) out.at(m, j, c) = a.at(m, j, c) + b.at(m, j, c);
  return out;
}

/// Constant-in-time process Y(t) = X(t_j) per path.
inline PathEnsemble broadcast_at_index(const PathEnsemble& a, std::size_t j) {
  if (j > a.grid().n) throw OutOfRange("broadcast index outside the grid");
  PathEnsemble out(a.grid(), a.dim(), a.paths(), a.seed(), a.generator_id() + "@" + std::to_string(j));
  for (std::size_t m = 0; m < a.paths(); ++m)
    for (std::size_t i = 0; i < a.grid().points(); ++i)
      for (std::size_t c = 0; c < a.dim(); ++c) out.at(m, i, c) = a.at(m, j, c);
  return out;
}

// Binary file: magic, version, header fields, then values ordered by time,
// component and path (one column per (j, c)).
namespace detail {
inline constexpr char kEnsembleMagic[8] = {'A', 'A', 'L', 'A', 'B', 'E', 'N', 'S'};
inline constexpr std::uint32_t kEnsembleVersion = 1;

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw InvalidArgument("ensemble file truncated");
  return v;
}
}  // namespace detail

inline void save_ensemble(const std::string& path, const PathEnsemble& ens) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidArgument("cannot open " + path + " for writing");
  os.write(detail::kEnsembleMagic, 8);
  detail::put(os, detail::kEnsembleVersion);
  detail::put(os, ens.grid().t0);
  detail::put(os, ens.grid().h);
  detail::put(os, static_cast<std::uint64_t>(ens.grid().n));
  detail::put(os, static_cast<std::uint64_t>(ens.dim()));
  detail::put(os, static_cast<std::uint64_t>(ens.paths()));
  detail::put(os, ens.seed());
  detail::put(os, static_cast<std::uint32_t>(ens.generator_id().size()));
  os.write(ens.generator_id().data(), static_cast<std::streamsize>(ens.generator_id().size()));
  std::vector<double> column(ens.paths());
  for (std::size_t j = 0; j < ens.grid().points(); ++j)
    for (std::size_t c = 0; c < ens.dim(); ++c) {
      for (std::size_t m = 0; m < ens.paths(); ++m) column[m] = ens.at(m, j, c);
      os.write(reinterpret_cast<const char*>(column.data()), static_cast<std::streamsize>(column.size() * sizeof(double)));
    }
  if (!os) throw InvalidArgument("write failed for " + path);
}

inline EnsembleHeader read_ensemble_header(std::istream& is) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, detail::kEnsembleMagic, 8) != 0) throw InvalidArgument("not an ensemble file");
  if (detail::get<std::uint32_t>(is) != detail::kEnsembleVersion) throw InvalidArgument("unsupported ensemble file version");
  EnsembleHeader h;
  h.grid.t0 = detail::get<double>(is);
  h.grid.h = detail::get<double>(is);
  h.grid.n = detail::get<std::uint64_t>(is);
  h.dim = detail::get<std::uint64_t>(is);
  h.paths = detail::get<std::uint64_t>(is);
  h.seed = detail::get<std::uint64_t>(is);
  const auto len = detail::get<std::uint32_t>(is);
  h.generator_id.resize(len);
  is.read(h.generator_id.data(), len);
  if (!is) throw InvalidArgument("ensemble file truncated");
  return h;
}

inline PathEnsemble load_ensemble(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidArgument("cannot open " + path);
  const EnsembleHeader h = read_ensemble_header(is);
  PathEnsemble ens(h.grid, h.dim, h.paths, h.seed, h.generator_id);
  std::vector<double> column(h.paths);
  for (std::size_t j = 0; j < h.grid.points(); ++j)
    for (std::size_t c = 0; c < h.dim; ++c) {
      is.read(reinterpret_cast<char*>(column.data()), static_cast<std::streamsize>(column.size() * sizeof(double)));
      if (!is) throw InvalidArgument("ensemble file truncated");
      for (std::size_t m = 0; m < h.paths; ++m) ens.at(m, j, c) = column[m];
    }
  return ens;
}

/// Loads and checks the stored header against the requested parameters.
inline PathEnsemble load_ensemble(const std::string& path, const EnsembleHeader& expected) {
  {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InvalidArgument("cannot open " + path);
    if (!(read_ensemble_header(is) == expected))
      throw ShapeMismatch("ensemble file " + path + " does not match the requested grid/dim/M/seed/generator");
  }
  return load_ensemble(path);
}

}  // namespace aalab
