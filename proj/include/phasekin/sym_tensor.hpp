#pragma once

#include <algorithm>
#include <vector>

#include "phasekin/grid.hpp"

namespace phasekin {

constexpr int kMaxTensorDegree = 3;

// Number of independent components of a symmetric degree-k tensor in n <= 2
// dimensions. For n = 2 a sorted multi-index over {0,1} is determined by how
// many indices equal 1, so there are k+1 components; for n = 1 there is one.
inline int sym_component_count(int dim, int degree) { return dim == 1 ? 1 : degree + 1; }

inline int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  int r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Symmetric degree-k covariant tensor field on Q with packed storage: one
// value per sorted multi-index. For n = 2 the packed slot of a multi-index
// is the number of indices equal to 1; its multiplicity is C(k, ones).
struct SymTensorField {
  SpatialGrid grid;
  int degree = 0;
  std::vector<double> v;

  SymTensorField() = default;
  SymTensorField(const SpatialGrid &g, int degree_) : grid(g), degree(degree_) {
    if (degree < 0 || degree > kMaxTensorDegree) throw Error("SymTensorField: degree out of range");
    v.assign(grid.size() * ncomp(), 0.0);
  }

  int ncomp() const { return sym_component_count(grid.dim, degree); }
  static int multiplicity(int degree, int ones) { return binomial(degree, ones); }

  double &comp(int i, int j, int c) { return v[grid.index(i, j) * ncomp() + c]; }
  double comp(int i, int j, int c) const { return v[grid.index(i, j) * ncomp() + c]; }

  // Component by arbitrary multi-index (any order of indices).
  double at(int i, int j, const std::vector<int> &idx) const {
    if (int(idx.size()) != degree) throw Error("SymTensorField: multi-index length mismatch");
    int ones = 0;
    for (int a : idx) {
      if (a < 0 || a >= grid.dim) throw Error("SymTensorField: multi-index out of range");
      ones += (a == 1);
    }
    return comp(i, j, grid.dim == 1 ? 0 : ones);
  }

  SymTensorField &operator+=(const SymTensorField &o) {
    for (std::size_t m = 0; m < v.size(); ++m) v[m] += o.v[m];
    return *this;
  }
  SymTensorField &operator-=(const SymTensorField &o) {
    for (std::size_t m = 0; m < v.size(); ++m) v[m] -= o.v[m];
    return *this;
  }
  SymTensorField &operator*=(double s) {
    for (double &x : v) x *= s;
    return *this;
  }

  static SymTensorField from_scalar(const ScalarField &f) {
    SymTensorField t(f.grid, 0);
    t.v = f.v;
    return t;
  }
  static SymTensorField from_vector(const VectorField &f) {
    SymTensorField t(f.grid, 1);
    for (int i = 0; i < f.grid.cells[0]; ++i)
      for (int j = 0; j < f.grid.cells[1]; ++j)
        for (int c = 0; c < t.ncomp(); ++c) t.comp(i, j, c) = f(i, j, c);
    return t;
  }
  ScalarField to_scalar() const {
    if (degree != 0) throw Error("SymTensorField: not degree 0");
    ScalarField f(grid);
    f.v = v;
    return f;
  }
  VectorField to_vector() const {
    if (degree != 1) throw Error("SymTensorField: not degree 1");
    VectorField f(grid);
    for (int i = 0; i < grid.cells[0]; ++i)
      for (int j = 0; j < grid.cells[1]; ++j)
        for (int c = 0; c < ncomp(); ++c) f(i, j, c) = comp(i, j, c);
    return f;
  }
};

// Sorted multi-index for packed slot c of a degree-k tensor in n dims.
inline std::vector<int> sym_multi_index(int dim, int degree, int c) {
  std::vector<int> idx(degree, 0);
  if (dim == 2)
    for (int a = degree - c; a < degree; ++a) idx[a] = 1;
  return idx;
}

// Pointwise symmetric tensor kernel helpers (packed, per cell).
// Value of z^{(x)k} at packed slot c: product of z components of the slot's
// multi-index.
inline double sym_power(const Vec2 &z, int dim, int degree, int c) {
  if (dim == 1) {
    double r = 1.0;
    for (int a = 0; a < degree; ++a) r *= z[0];
    return r;
  }
  double r = 1.0;
  for (int a = 0; a < degree - c; ++a) r *= z[0];
  for (int a = 0; a < c; ++a) r *= z[1];
  return r;
}

// Symmetric tensor product <A (.) v> of a degree-k field A with a vector
// field v: the sum of v inserted into each of the k+1 slots. Degree 0
// reduces to A * v.
SymTensorField sym_tensor_product(const SymTensorField &a, const VectorField &v);

// Divergence of a degree-(k+1) field, contracting the first index with
// grad_x (central differences, periodic); returns a degree-k field.
SymTensorField divergence(const SymTensorField &t);

// Full contraction of a packed symmetric tensor value with s^{(x)k}.
inline double contract_full(const SymTensorField &t, int i, int j, const Vec2 &s) {
  double acc = 0.0;
  for (int c = 0; c < t.ncomp(); ++c)
    acc += SymTensorField::multiplicity(t.degree, t.grid.dim == 1 ? t.degree : c) *
           sym_power(s, t.grid.dim, t.degree, c) * t.comp(i, j, c);
  return acc;
}

// Consecutive moments M^0..M^m on one spatial grid.
struct MomentSet {
  int degree = 0;
  std::vector<SymTensorField> tensors;

  MomentSet() = default;
  explicit MomentSet(std::vector<SymTensorField> t) : tensors(std::move(t)) {
    if (tensors.empty()) throw Error("MomentSet: empty");
    degree = int(tensors.size()) - 1;
    for (int k = 0; k <= degree; ++k) {
      if (tensors[k].degree != k) throw Error("MomentSet: degrees must be consecutive from 0");
      if (!tensors[k].grid.same(tensors[0].grid)) throw Error("MomentSet: grid mismatch");
    }
  }
};

}  // namespace phasekin
