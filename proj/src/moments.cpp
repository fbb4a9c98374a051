#include "phasekin/moments.hpp"

#include <cmath>

namespace phasekin {

SymTensorField weighted_moment(const DistributionField &g, const SeparableHamiltonian &h, const Weight &w, int k) {
  if (k < 0 || k > kMaxTensorDegree) throw Error("weighted_moment: degree out of range");
  const PhaseGrid &gr = g.grid;
  if (k > 0) h.require_p_grid_valid(gr, "weighted_moment");
  SymTensorField out(gr.space, k);
  const double dpv = gr.p_volume();
  for (int i = 0; i < gr.space.cells[0]; ++i)
    for (int j = 0; j < gr.space.cells[1]; ++j) {
      Vec2 x = gr.space.center(i, j);
      for (int c = 0; c < out.ncomp(); ++c) {
        double acc = 0.0;
        for (int kk = 0; kk < gr.p_cells[0]; ++kk)
          for (int ll = 0; ll < gr.p_cells[1]; ++ll) {
            Vec2 p = gr.p_center(kk, ll);
            if (gr.dim() == 1) p[1] = 0.0;
            double kern = (k == 0) ? 1.0 : sym_power(h.z(p), gr.dim(), k, c);
            acc += kern * g(i, j, kk, ll) * w.eval(x, p);
          }
        out.comp(i, j, c) = acc * dpv;
      }
    }
  return out;
}

SymTensorField kinetic_moment(const DistributionField &g, const SeparableHamiltonian &h, int k) {
  return weighted_moment(g, h, Weight::one(), k);
}

MomentEvolution moment_evolution_rhs(const DistributionField &g, const SeparableHamiltonian &h, const Weight &w,
                                     int k) {
  if (!w.commutes_with_h) throw Error("moment_evolution_rhs: weight must Poisson-commute with H");
  if (k < 0 || k + 1 > kMaxTensorDegree) throw Error("moment_evolution_rhs: degree out of range");
  const PhaseGrid &gr = g.grid;
  h.require_p_grid_valid(gr, "moment_evolution_rhs");

  MomentEvolution out;
  out.flux_divergence = divergence(weighted_moment(g, h, w, k + 1));
  out.source = SymTensorField(gr.space, k);
  if (k == 0) return out;

  const double dpv = gr.p_volume();
  const int dim = gr.dim();
  for (int i = 0; i < gr.space.cells[0]; ++i)
    for (int j = 0; j < gr.space.cells[1]; ++j) {
      Vec2 x = gr.space.center(i, j);
      Vec2 gu = h.grad_potential(x);
      for (int kk = 0; kk < gr.p_cells[0]; ++kk)
        for (int ll = 0; ll < gr.p_cells[1]; ++ll) {
          Vec2 p = gr.p_center(kk, ll);
          if (dim == 1) p[1] = 0.0;
          double gw = g(i, j, kk, ll) * w.eval(x, p);
          if (gw == 0.0) continue;
          Vec2 z = h.z(p);
          Vec2 hv = h.hessian(p).mul(gu);
          // < z^{(x)(k-1)} (.) hv >, packed per sorted multi-index.
          for (int c = 0; c < out.source.ncomp(); ++c) {
            double kern;
            if (dim == 1) {
              kern = k * sym_power(z, 1, k - 1, 0) * hv[0];
            } else {
              // Slot c of the degree-k result has k-c zero indices and c
              // one indices; hv can occupy a zero slot or a one slot.
              kern = 0.0;
              if (c <= k - 1) kern += (k - c) * hv[0] * sym_power(z, 2, k - 1, c);
              if (c >= 1) kern += c * hv[1] * sym_power(z, 2, k - 1, c - 1);
            }
            out.source.comp(i, j, c) -= gw * kern * dpv;
          }
        }
    }
  return out;
}

double verify_moment_consistency(const DistributionField &g, const SeparableHamiltonian &h, int k, double dt) {
  SymTensorField m0 = kinetic_moment(g, h, k);
  DistributionField g1 = step_transport(g, h, dt, TimeScheme::RK2);
  SymTensorField m1 = kinetic_moment(g1, h, k);
  MomentEvolution ev = moment_evolution_rhs(g, h, Weight::one(), k);

  const SpatialGrid &s = m0.grid;
  double l1 = 0.0;
  for (int i = 0; i < s.cells[0]; ++i)
    for (int j = 0; j < s.cells[1]; ++j)
      for (int c = 0; c < m0.ncomp(); ++c) {
        double ddt = (m1.comp(i, j, c) - m0.comp(i, j, c)) / dt;
        double rhs = -ev.flux_divergence.comp(i, j, c) + ev.source.comp(i, j, c);
        l1 += std::abs(ddt - rhs);
      }
  return l1 * s.cell_volume();
}

}  // namespace phasekin
