#include "phasekin/sym_tensor.hpp"

namespace phasekin {

SymTensorField sym_tensor_product(const SymTensorField &a, const VectorField &v) {
  if (!a.grid.same(v.grid)) throw GridError("sym_tensor_product: grid mismatch");
  if (a.degree + 1 > kMaxTensorDegree) throw Error("sym_tensor_product: degree overflow");
  const int k = a.degree;
  SymTensorField out(a.grid, k + 1);
  const int dim = a.grid.dim;
  for (int i = 0; i < a.grid.cells[0]; ++i)
    for (int j = 0; j < a.grid.cells[1]; ++j) {
      if (dim == 1) {
        out.comp(i, j, 0) = (k + 1) * v(i, j, 0) * a.comp(i, j, 0);
        continue;
      }
      // Result slot c has k+1-c zero indices and c one indices; removing a
      // zero leaves slot c of A, removing a one leaves slot c-1.
      for (int c = 0; c <= k + 1; ++c) {
        double acc = 0.0;
        if (c <= k) acc += (k + 1 - c) * v(i, j, 0) * a.comp(i, j, c);
        if (c >= 1) acc += c * v(i, j, 1) * a.comp(i, j, c - 1);
        out.comp(i, j, c) = acc;
      }
    }
  return out;
}

namespace {
double comp_central_diff(const SymTensorField &t, int i, int j, int c, int d) {
  const SpatialGrid &g = t.grid;
  if (d >= g.dim) return 0.0;
  int ip = g.wrap(d, (d == 0 ? i : j) + 1);
  int im = g.wrap(d, (d == 0 ? i : j) - 1);
  double fp = (d == 0) ? t.comp(ip, j, c) : t.comp(i, ip, c);
  double fm = (d == 0) ? t.comp(im, j, c) : t.comp(i, im, c);
  return (fp - fm) / (2.0 * g.delta(d));
}
}  // namespace

SymTensorField divergence(const SymTensorField &t) {
  if (t.degree < 1) throw Error("divergence: needs degree >= 1");
  SymTensorField out(t.grid, t.degree - 1);
  const int dim = t.grid.dim;
  for (int i = 0; i < t.grid.cells[0]; ++i)
    for (int j = 0; j < t.grid.cells[1]; ++j)
      for (int c = 0; c < out.ncomp(); ++c) {
        // Index (d, J): prepending 0 keeps the ones count, prepending 1
        // raises it by one.
        double acc = comp_central_diff(t, i, j, c, 0);
        if (dim == 2) acc += comp_central_diff(t, i, j, c + 1, 1);
        out.comp(i, j, c) = acc;
      }
  return out;
}

}  // namespace phasekin
