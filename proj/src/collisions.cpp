#include "phasekin/collisions.hpp"

#include <cmath>

namespace phasekin {

ScatteringKernel::ScatteringKernel(const PhaseGrid &g) : grid(g) {
  const double tol = 1e-9 * g.p_scale();
  const int np = int(g.p_size());
  shell_of.assign(np, -1);
  std::vector<double> rep_norm;
  for (int k = 0; k < g.p_cells[0]; ++k)
    for (int l = 0; l < g.p_cells[1]; ++l) {
      Vec2 p = g.p_center(k, l);
      if (g.dim() == 1) p[1] = 0.0;
      double n = norm(p);
      int id = -1;
      for (std::size_t s = 0; s < rep_norm.size(); ++s)
        if (std::abs(n - rep_norm[s]) <= tol) {
          id = int(s);
          break;
        }
      if (id < 0) {
        id = int(shells.size());
        shells.push_back({});
        rep_norm.push_back(n);
      }
      shell_of[int(g.p_index(k, l))] = id;
      shells[id].push_back(int(g.p_index(k, l)));
    }
  shell_offset.resize(shells.size());
  block_size = 0;
  for (std::size_t s = 0; s < shells.size(); ++s) {
    shell_offset[s] = block_size;
    block_size += shells[s].size() * shells[s].size();
  }
  alpha.assign(grid.space.size() * block_size, 0.0);
}

int ScatteringKernel::singleton_shell_count() const {
  int n = 0;
  for (const auto &s : shells) n += (s.size() == 1);
  return n;
}

void ScatteringKernel::set(int xi, int xj, int shell, int a, int b, double value) {
  if (!(value >= 0.0)) throw Error("ScatteringKernel: alpha must be nonnegative");
  entry(xi, xj, shell, a, b) = value;
  entry(xi, xj, shell, b, a) = value;
}

ScatteringKernel ScatteringKernel::isotropic(const PhaseGrid &g, std::function<double(const Vec2 &)> sigma) {
  ScatteringKernel k(g);
  for (int i = 0; i < g.space.cells[0]; ++i)
    for (int j = 0; j < g.space.cells[1]; ++j) {
      double s = sigma(g.space.center(i, j));
      if (!(s >= 0.0)) throw Error("ScatteringKernel: sigma must be nonnegative");
      for (std::size_t sh = 0; sh < k.shells.size(); ++sh) {
        double v = s / double(k.shells[sh].size());
        for (std::size_t a = 0; a < k.shells[sh].size(); ++a)
          for (std::size_t b = 0; b < k.shells[sh].size(); ++b) k.entry(i, j, int(sh), int(a), int(b)) = v;
      }
    }
  return k;
}

ScatteringKernel ScatteringKernel::from_function(const PhaseGrid &g,
                                                 std::function<double(const Vec2 &, const Vec2 &, const Vec2 &)> f) {
  ScatteringKernel k(g);
  auto pcenter = [&](int lin) {
    Vec2 p = g.p_center(lin / g.p_cells[1], lin % g.p_cells[1]);
    if (g.dim() == 1) p[1] = 0.0;
    return p;
  };
  for (int i = 0; i < g.space.cells[0]; ++i)
    for (int j = 0; j < g.space.cells[1]; ++j) {
      Vec2 x = g.space.center(i, j);
      for (std::size_t sh = 0; sh < k.shells.size(); ++sh)
        for (std::size_t a = 0; a < k.shells[sh].size(); ++a)
          for (std::size_t b = a; b < k.shells[sh].size(); ++b) {
            double v = f(x, pcenter(k.shells[sh][a]), pcenter(k.shells[sh][b]));
            k.set(i, j, int(sh), int(a), int(b), v);
          }
    }
  return k;
}

AbsorptionField absorption_from_scattering(const ScatteringKernel &kernel) {
  const PhaseGrid &g = kernel.grid;
  AbsorptionField a(g);
  for (int i = 0; i < g.space.cells[0]; ++i)
    for (int j = 0; j < g.space.cells[1]; ++j)
      for (std::size_t sh = 0; sh < kernel.shells.size(); ++sh) {
        const auto &members = kernel.shells[sh];
        for (std::size_t b = 0; b < members.size(); ++b) {
          double acc = 0.0;
          for (std::size_t aa = 0; aa < members.size(); ++aa) acc += kernel.entry(i, j, int(sh), int(aa), int(b));
          a.v[g.space.index(i, j) * g.p_size() + members[b]] = acc;
        }
      }
  return a;
}

DistributionField collision_rhs(const DistributionField &psi, const ScatteringKernel &kernel,
                                const SeparableHamiltonian &h) {
  if (!h.is_radiation()) throw Error("collision_rhs: radiation Hamiltonian required");
  if (!psi.grid.same(kernel.grid)) throw GridError("collision_rhs: grid mismatch");
  const PhaseGrid &g = psi.grid;
  DistributionField out(g);
  for (int i = 0; i < g.space.cells[0]; ++i)
    for (int j = 0; j < g.space.cells[1]; ++j) {
      std::size_t base = g.space.index(i, j) * g.p_size();
      for (std::size_t sh = 0; sh < kernel.shells.size(); ++sh) {
        const auto &members = kernel.shells[sh];
        for (std::size_t b = 0; b < members.size(); ++b) {
          double pb = psi.v[base + members[b]];
          double acc = 0.0;
          for (std::size_t aa = 0; aa < members.size(); ++aa)
            acc += kernel.entry(i, j, int(sh), int(aa), int(b)) * (psi.v[base + members[aa]] - pb);
          out.v[base + members[b]] = acc;
        }
      }
    }
  return out;
}

CollisionDiagnostics collision_diagnostics(const DistributionField &psi, const ScatteringKernel &kernel,
                                           const SeparableHamiltonian &h) {
  for (double x : psi.v)
    if (!(x > 0.0)) throw Error("collision_diagnostics: Psi must be positive");
  DistributionField rhs = collision_rhs(psi, kernel, h);
  const PhaseGrid &g = psi.grid;
  CollisionDiagnostics d;
  for (int i = 0; i < g.space.cells[0]; ++i)
    for (int j = 0; j < g.space.cells[1]; ++j)
      for (int k = 0; k < g.p_cells[0]; ++k)
        for (int l = 0; l < g.p_cells[1]; ++l) {
          Vec2 p = g.p_center(k, l);
          if (g.dim() == 1) p[1] = 0.0;
          double r = rhs(i, j, k, l);
          d.energy_rate += h.kinetic(p) * r;
          d.entropy_rate += r / psi(i, j, k, l);
        }
  d.energy_rate *= g.cell_volume();
  d.entropy_rate *= g.cell_volume();
  return d;
}

}  // namespace phasekin
