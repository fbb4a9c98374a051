#include "phasekin/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace phasekin {

namespace {

// One-sided at the momentum boundary, central inside, central+periodic in x.
double diff_x(const DistributionField &f, int i, int j, int k, int l, int d) {
  const PhaseGrid &g = f.grid;
  if (d >= g.dim()) return 0.0;
  const int n = g.space.cells[d];
  int c = (d == 0) ? i : j;
  int cp = (c + 1 == n) ? 0 : c + 1;
  int cm = (c == 0) ? n - 1 : c - 1;
  double fp = (d == 0) ? f(cp, j, k, l) : f(i, cp, k, l);
  double fm = (d == 0) ? f(cm, j, k, l) : f(i, cm, k, l);
  return (fp - fm) / (2.0 * g.space.delta(d));
}

double diff_p(const DistributionField &f, int i, int j, int k, int l, int d) {
  const PhaseGrid &g = f.grid;
  if (d >= g.dim()) return 0.0;
  const int n = g.p_cells[d];
  int c = (d == 0) ? k : l;
  double h = g.dp(d);
  auto val = [&](int m) { return (d == 0) ? f(i, j, m, l) : f(i, j, k, m); };
  if (c == 0) return (val(1) - val(0)) / h;
  if (c == n - 1) return (val(n - 1) - val(n - 2)) / h;
  return (val(c + 1) - val(c - 1)) / (2.0 * h);
}

}  // namespace

DistributionField poisson_bracket(const DistributionField &f, const DistributionField &g) {
  f.require_same_grid(g, "poisson_bracket");
  const PhaseGrid &gr = f.grid;
  DistributionField out(gr);
  for (int i = 0; i < gr.space.cells[0]; ++i)
    for (int j = 0; j < gr.space.cells[1]; ++j)
      for (int k = 0; k < gr.p_cells[0]; ++k)
        for (int l = 0; l < gr.p_cells[1]; ++l) {
          double acc = 0.0;
          for (int d = 0; d < gr.dim(); ++d)
            acc += diff_x(f, i, j, k, l, d) * diff_p(g, i, j, k, l, d) -
                   diff_x(g, i, j, k, l, d) * diff_p(f, i, j, k, l, d);
          out(i, j, k, l) = acc;
        }
  return out;
}

DistributionField transport_rhs(const DistributionField &g, const SeparableHamiltonian &h) {
  const PhaseGrid &gr = g.grid;
  g.require_finite("transport_rhs");
  h.require_p_grid_valid(gr, "transport_rhs");

  DistributionField out(gr);
  const int nx0 = gr.space.cells[0], nx1 = gr.space.cells[1];
  const int np0 = gr.p_cells[0], np1 = gr.p_cells[1];

  // z(p) per momentum cell; -grad U per spatial cell.
  std::vector<Vec2> zc(gr.p_size());
  for (int k = 0; k < np0; ++k)
    for (int l = 0; l < np1; ++l) {
      Vec2 p = gr.p_center(k, l);
      if (gr.dim() == 1) p[1] = 0.0;
      zc[gr.p_index(k, l)] = h.z(p);
    }
  std::vector<Vec2> force(gr.space.size());
  for (int i = 0; i < nx0; ++i)
    for (int j = 0; j < nx1; ++j) {
      Vec2 gu = h.grad_potential(gr.space.center(i, j));
      force[gr.space.index(i, j)] = {-gu[0], -gu[1]};
    }

  // x-direction upwind fluxes, periodic.
  for (int d = 0; d < gr.dim(); ++d) {
    const int n = (d == 0) ? nx0 : nx1;
    const double inv = 1.0 / gr.space.delta(d);
    for (int i = 0; i < nx0; ++i)
      for (int j = 0; j < nx1; ++j)
        for (int k = 0; k < np0; ++k)
          for (int l = 0; l < np1; ++l) {
            double v = zc[gr.p_index(k, l)][d];
            int c = (d == 0) ? i : j;
            int cp = (c + 1 == n) ? 0 : c + 1;
            int cm = (c == 0) ? n - 1 : c - 1;
            double up = v > 0.0 ? g(i, j, k, l) : ((d == 0) ? g(cp, j, k, l) : g(i, cp, k, l));
            double um = v > 0.0 ? ((d == 0) ? g(cm, j, k, l) : g(i, cm, k, l)) : g(i, j, k, l);
            out(i, j, k, l) -= v * (up - um) * inv;
          }
  }

  // p-direction upwind fluxes, zero inflow at the truncation boundary.
  for (int d = 0; d < gr.dim(); ++d) {
    const int n = (d == 0) ? np0 : np1;
    const double inv = 1.0 / gr.dp(d);
    for (int i = 0; i < nx0; ++i)
      for (int j = 0; j < nx1; ++j) {
        double a = force[gr.space.index(i, j)][d];
        if (a == 0.0) continue;
        for (int k = 0; k < np0; ++k)
          for (int l = 0; l < np1; ++l) {
            int c = (d == 0) ? k : l;
            auto val = [&](int m) { return (d == 0) ? g(i, j, m, l) : g(i, j, k, m); };
            // Face c+1/2 flux minus face c-1/2 flux.
            double qp, qm;
            if (a > 0.0) {
              qp = val(c);
              qm = (c == 0) ? 0.0 : val(c - 1);
            } else {
              qp = (c == n - 1) ? 0.0 : val(c + 1);
              qm = val(c);
            }
            out(i, j, k, l) -= a * (qp - qm) * inv;
          }
      }
  }
  return out;
}

double transport_cfl_bound(const PhaseGrid &grid, const SeparableHamiltonian &h) {
  double zmax = 0.0, fmax = 0.0;
  for (int k = 0; k < grid.p_cells[0]; ++k)
    for (int l = 0; l < grid.p_cells[1]; ++l) {
      Vec2 p = grid.p_center(k, l);
      if (grid.dim() == 1) p[1] = 0.0;
      Vec2 z = h.z(p);
      for (int d = 0; d < grid.dim(); ++d) zmax = std::max(zmax, std::abs(z[d]));
    }
  for (int i = 0; i < grid.space.cells[0]; ++i)
    for (int j = 0; j < grid.space.cells[1]; ++j) {
      Vec2 gu = h.grad_potential(grid.space.center(i, j));
      for (int d = 0; d < grid.dim(); ++d) fmax = std::max(fmax, std::abs(gu[d]));
    }
  double bound = std::numeric_limits<double>::infinity();
  for (int d = 0; d < grid.dim(); ++d) {
    if (zmax > 0.0) bound = std::min(bound, grid.space.delta(d) / zmax);
    if (fmax > 0.0) bound = std::min(bound, grid.dp(d) / fmax);
  }
  return bound;
}

DistributionField step_transport(const DistributionField &g, const SeparableHamiltonian &h, double dt,
                                 TimeScheme scheme) {
  double bound = transport_cfl_bound(g.grid, h);
  if (std::abs(dt) > 0.9 * bound)
    throw CflError("step_transport: dt " + std::to_string(std::abs(dt)) + " exceeds 0.9 * CFL bound " +
                   std::to_string(bound));

  auto axpy = [](const DistributionField &a, double s, const DistributionField &b) {
    DistributionField r = a;
    for (std::size_t m = 0; m < r.v.size(); ++m) r.v[m] += s * b.v[m];
    return r;
  };

  switch (scheme) {
    case TimeScheme::Euler: {
      return axpy(g, dt, transport_rhs(g, h));
    }
    case TimeScheme::RK2: {
      DistributionField k1 = transport_rhs(g, h);
      DistributionField mid = axpy(g, 0.5 * dt, k1);
      DistributionField k2 = transport_rhs(mid, h);
      return axpy(g, dt, k2);
    }
    case TimeScheme::RK4: {
      DistributionField k1 = transport_rhs(g, h);
      DistributionField k2 = transport_rhs(axpy(g, 0.5 * dt, k1), h);
      DistributionField k3 = transport_rhs(axpy(g, 0.5 * dt, k2), h);
      DistributionField k4 = transport_rhs(axpy(g, dt, k3), h);
      DistributionField out = g;
      for (std::size_t m = 0; m < out.v.size(); ++m)
        out.v[m] += dt / 6.0 * (k1.v[m] + 2.0 * k2.v[m] + 2.0 * k3.v[m] + k4.v[m]);
      return out;
    }
  }
  throw Error("step_transport: unknown scheme");
}

double total_mass(const DistributionField &g) {
  double s = 0.0;
  for (double x : g.v) s += x;
  return s * g.grid.cell_volume();
}

double total_energy(const DistributionField &g, const SeparableHamiltonian &h) {
  const PhaseGrid &gr = g.grid;
  double s = 0.0;
  for (int i = 0; i < gr.space.cells[0]; ++i)
    for (int j = 0; j < gr.space.cells[1]; ++j) {
      Vec2 x = gr.space.center(i, j);
      for (int k = 0; k < gr.p_cells[0]; ++k)
        for (int l = 0; l < gr.p_cells[1]; ++l) {
          Vec2 p = gr.p_center(k, l);
          if (gr.dim() == 1) p[1] = 0.0;
          s += h(x, p) * g(i, j, k, l);
        }
    }
  return s * gr.cell_volume();
}

Vec2 total_momentum(const DistributionField &g) {
  const PhaseGrid &gr = g.grid;
  Vec2 s{0.0, 0.0};
  for (int i = 0; i < gr.space.cells[0]; ++i)
    for (int j = 0; j < gr.space.cells[1]; ++j)
      for (int k = 0; k < gr.p_cells[0]; ++k)
        for (int l = 0; l < gr.p_cells[1]; ++l) {
          Vec2 p = gr.p_center(k, l);
          if (gr.dim() == 1) p[1] = 0.0;
          s[0] += p[0] * g(i, j, k, l);
          s[1] += p[1] * g(i, j, k, l);
        }
  return {s[0] * gr.cell_volume(), s[1] * gr.cell_volume()};
}

double wave_entropy(const DistributionField &psi) {
  double s = 0.0;
  for (double x : psi.v) {
    if (!(x > 0.0)) throw Error("wave_entropy: Psi must be positive everywhere");
    s += std::log(x);
  }
  return s * psi.grid.cell_volume();
}

double boltzmann_entropy(const DistributionField &f) {
  double s = 0.0;
  for (double x : f.v) {
    if (x < 0.0) throw Error("boltzmann_entropy: f must be nonnegative");
    if (x > 0.0) s += x * std::log(x);
  }
  return s * f.grid.cell_volume();
}

DistributionField intensity_from_density(const DistributionField &psi, const SeparableHamiltonian &h) {
  if (!h.is_radiation()) throw Error("intensity_from_density: radiation Hamiltonian required");
  const PhaseGrid &gr = psi.grid;
  DistributionField out(gr);
  const double c = h.speed();
  for (int i = 0; i < gr.space.cells[0]; ++i)
    for (int j = 0; j < gr.space.cells[1]; ++j)
      for (int k = 0; k < gr.p_cells[0]; ++k)
        for (int l = 0; l < gr.p_cells[1]; ++l) {
          Vec2 p = gr.p_center(k, l);
          if (gr.dim() == 1) p[1] = 0.0;
          out(i, j, k, l) = c * h.kinetic(p) * psi(i, j, k, l);
        }
  return out;
}

}  // namespace phasekin
