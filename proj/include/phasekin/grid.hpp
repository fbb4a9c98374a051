#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace phasekin {

using Vec2 = std::array<double, 2>;

inline double dot(const Vec2 &a, const Vec2 &b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm(const Vec2 &v) { return std::sqrt(dot(v, v)); }
inline Vec2 operator+(const Vec2 &a, const Vec2 &b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec2 operator-(const Vec2 &a, const Vec2 &b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec2 operator*(double s, const Vec2 &v) { return {s * v[0], s * v[1]}; }

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GridError : Error {
  using Error::Error;
};
struct CflError : Error {
  using Error::Error;
};
struct DegenerateGradientError : Error {
  using Error::Error;
};
struct PositivityError : Error {
  using Error::Error;
};

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double length() const { return hi - lo; }
};

// Spatial grid over Q, uniform tensor-product cells, periodic in every
// active axis. Both axis slots are always present; axes beyond `dim` are
// inert (one cell of unit length) so loops, volumes and quadrature stay
// uniform across n = 1 and n = 2.
struct SpatialGrid {
  int dim = 1;
  std::array<int, 2> cells{1, 1};
  std::array<Interval, 2> extent{Interval{0.0, 1.0}, Interval{0.0, 1.0}};

  SpatialGrid() = default;
  SpatialGrid(int dim_, std::array<int, 2> cells_, std::array<Interval, 2> extent_)
      : dim(dim_), cells(cells_), extent(extent_) {
    if (dim < 1 || dim > 2) throw GridError("SpatialGrid: dim must be 1 or 2");
    for (int d = dim; d < 2; ++d) {
      cells[d] = 1;
      extent[d] = Interval{0.0, 1.0};
    }
    for (int d = 0; d < dim; ++d) {
      if (cells[d] < 4) throw GridError("SpatialGrid: cell counts must be >= 4");
      if (!(extent[d].length() > 0.0)) throw GridError("SpatialGrid: extent must have positive length");
    }
  }

  double delta(int d) const { return extent[d].length() / cells[d]; }
  double cell_volume() const { return delta(0) * delta(1); }
  std::size_t size() const { return std::size_t(cells[0]) * cells[1]; }
  std::size_t index(int i, int j) const { return std::size_t(i) * cells[1] + j; }
  double axis_center(int d, int i) const { return extent[d].lo + (i + 0.5) * delta(d); }
  Vec2 center(int i, int j) const { return {axis_center(0, i), axis_center(1, j)}; }
  int wrap(int d, int i) const {
    int n = cells[d];
    if (i >= n) return i - n;
    if (i < 0) return i + n;
    return i;
  }
  bool same(const SpatialGrid &o) const {
    return dim == o.dim && cells == o.cells && extent[0].lo == o.extent[0].lo && extent[0].hi == o.extent[0].hi &&
           extent[1].lo == o.extent[1].lo && extent[1].hi == o.extent[1].hi;
  }
};

// Phase-space grid T*Q = Q x R^n, truncated in p. Periodic in x, zero-inflow
// in p.
struct PhaseGrid {
  SpatialGrid space;
  std::array<int, 2> p_cells{1, 1};
  std::array<Interval, 2> p_extent{Interval{0.0, 1.0}, Interval{0.0, 1.0}};

  PhaseGrid() = default;
  PhaseGrid(SpatialGrid space_, std::array<int, 2> p_cells_, std::array<Interval, 2> p_extent_)
      : space(space_), p_cells(p_cells_), p_extent(p_extent_) {
    for (int d = space.dim; d < 2; ++d) {
      p_cells[d] = 1;
      p_extent[d] = Interval{0.0, 1.0};
    }
    for (int d = 0; d < space.dim; ++d) {
      if (p_cells[d] < 4) throw GridError("PhaseGrid: p cell counts must be >= 4");
      if (!(p_extent[d].length() > 0.0)) throw GridError("PhaseGrid: p extent must have positive length");
    }
  }

  int dim() const { return space.dim; }
  double dp(int d) const { return p_extent[d].length() / p_cells[d]; }
  double p_volume() const { return dp(0) * dp(1); }
  double cell_volume() const { return space.cell_volume() * p_volume(); }
  std::size_t p_size() const { return std::size_t(p_cells[0]) * p_cells[1]; }
  std::size_t size() const { return space.size() * p_size(); }
  std::size_t p_index(int k, int l) const { return std::size_t(k) * p_cells[1] + l; }
  std::size_t index(int i, int j, int k, int l) const { return space.index(i, j) * p_size() + p_index(k, l); }
  double p_axis_center(int d, int k) const { return p_extent[d].lo + (k + 0.5) * dp(d); }
  Vec2 p_center(int k, int l) const { return {p_axis_center(0, k), p_axis_center(1, l)}; }
  // Largest momentum extent length; reference scale for the p = 0 exclusion.
  double p_scale() const {
    double s = 0.0;
    for (int d = 0; d < space.dim; ++d) s = std::max(s, p_extent[d].length());
    return s;
  }
  bool same(const PhaseGrid &o) const {
    return space.same(o.space) && p_cells == o.p_cells && p_extent[0].lo == o.p_extent[0].lo &&
           p_extent[0].hi == o.p_extent[0].hi && p_extent[1].lo == o.p_extent[1].lo &&
           p_extent[1].hi == o.p_extent[1].hi;
  }
};

struct ScalarField {
  SpatialGrid grid;
  std::vector<double> v;

  ScalarField() = default;
  explicit ScalarField(const SpatialGrid &g, double fill = 0.0) : grid(g), v(g.size(), fill) {}

  double &operator()(int i, int j) { return v[grid.index(i, j)]; }
  double operator()(int i, int j) const { return v[grid.index(i, j)]; }

  template <class F> static ScalarField from(const SpatialGrid &g, F f) {
    ScalarField out(g);
    for (int i = 0; i < g.cells[0]; ++i)
      for (int j = 0; j < g.cells[1]; ++j) out(i, j) = f(g.center(i, j));
    return out;
  }
};

struct VectorField {
  SpatialGrid grid;
  std::vector<double> v;  // 2 components per cell, inactive axis stays 0

  VectorField() = default;
  explicit VectorField(const SpatialGrid &g) : grid(g), v(2 * g.size(), 0.0) {}

  double &operator()(int i, int j, int c) { return v[2 * grid.index(i, j) + c]; }
  double operator()(int i, int j, int c) const { return v[2 * grid.index(i, j) + c]; }
  Vec2 at(int i, int j) const { return {v[2 * grid.index(i, j)], v[2 * grid.index(i, j) + 1]}; }
  void set(int i, int j, const Vec2 &w) {
    v[2 * grid.index(i, j)] = w[0];
    v[2 * grid.index(i, j) + 1] = w[1];
  }

  template <class F> static VectorField from(const SpatialGrid &g, F f) {
    VectorField out(g);
    for (int i = 0; i < g.cells[0]; ++i)
      for (int j = 0; j < g.cells[1]; ++j) out.set(i, j, f(g.center(i, j)));
    return out;
  }
};

// Gridded phase-space density g(x,p), a density with respect to dp dx.
struct DistributionField {
  PhaseGrid grid;
  std::vector<double> v;

  DistributionField() = default;
  explicit DistributionField(const PhaseGrid &g, double fill = 0.0) : grid(g), v(g.size(), fill) {}

  double &operator()(int i, int j, int k, int l) { return v[grid.index(i, j, k, l)]; }
  double operator()(int i, int j, int k, int l) const { return v[grid.index(i, j, k, l)]; }

  template <class F> static DistributionField from(const PhaseGrid &g, F f) {
    DistributionField out(g);
    for (int i = 0; i < g.space.cells[0]; ++i)
      for (int j = 0; j < g.space.cells[1]; ++j)
        for (int k = 0; k < g.p_cells[0]; ++k)
          for (int l = 0; l < g.p_cells[1]; ++l) out(i, j, k, l) = f(g.space.center(i, j), g.p_center(k, l));
    return out;
  }

  void require_same_grid(const DistributionField &o, const char *what) const {
    if (!grid.same(o.grid)) throw GridError(std::string(what) + ": grid mismatch");
  }
  void require_finite(const char *what) const {
    for (double x : v)
      if (!std::isfinite(x)) throw Error(std::string(what) + ": non-finite field value");
  }
  void require_nonnegative(const char *what) const {
    for (double x : v)
      if (x < 0.0) throw Error(std::string(what) + ": negative field value");
  }
};

// Central difference of a periodic scalar field, one component.
inline double central_diff(const ScalarField &f, int i, int j, int d) {
  const SpatialGrid &g = f.grid;
  if (d >= g.dim) return 0.0;
  int ip = g.wrap(d, (d == 0 ? i : j) + 1);
  int im = g.wrap(d, (d == 0 ? i : j) - 1);
  double fp = (d == 0) ? f(ip, j) : f(i, ip);
  double fm = (d == 0) ? f(im, j) : f(i, im);
  return (fp - fm) / (2.0 * g.delta(d));
}

inline Vec2 central_gradient(const ScalarField &f, int i, int j) {
  return {central_diff(f, i, j, 0), central_diff(f, i, j, 1)};
}

}  // namespace phasekin
