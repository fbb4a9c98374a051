#pragma once

#include <functional>
#include <vector>

#include "phasekin/hamiltonian.hpp"
#include "phasekin/kinetics.hpp"

namespace phasekin {

// Elastic scattering kernel alpha(x, p', p) >= 0, symmetric in (p', p) and
// supported on momentum shells: equivalence classes of p cells whose norms
// match within 1e-9 of the momentum extent. The discrete shell measure is
// the counting measure (unit quadrature weights).
struct ScatteringKernel {
  PhaseGrid grid;
  std::vector<std::vector<int>> shells;   // p-cell linear indices per shell
  std::vector<int> shell_of;              // p-cell linear index -> shell id
  std::vector<std::size_t> shell_offset;  // matrix offset inside one x block
  std::size_t block_size = 0;             // sum of |shell|^2
  std::vector<double> alpha;              // [x][shell matrix] dense symmetric

  explicit ScatteringKernel(const PhaseGrid &g);

  int singleton_shell_count() const;

  double &entry(int xi, int xj, int shell, int a, int b) {
    return alpha[grid.space.index(xi, xj) * block_size + shell_offset[shell] + std::size_t(a) * shells[shell].size() +
                 b];
  }
  double entry(int xi, int xj, int shell, int a, int b) const {
    return alpha[grid.space.index(xi, xj) * block_size + shell_offset[shell] + std::size_t(a) * shells[shell].size() +
                 b];
  }
  // Sets alpha(x, p_a, p_b) = alpha(x, p_b, p_a) = value (local shell indices).
  void set(int xi, int xj, int shell, int a, int b, double value);

  // alpha(x, p', p) = sigma(x) / |shell(p)|, so the absorption coefficient
  // equals sigma.
  static ScatteringKernel isotropic(const PhaseGrid &g, std::function<double(const Vec2 &)> sigma);
  // Entries evaluated for sorted pairs and mirrored, so symmetry is exact.
  static ScatteringKernel from_function(const PhaseGrid &g,
                                        std::function<double(const Vec2 &, const Vec2 &, const Vec2 &)> f);
};

using AbsorptionField = DistributionField;

// a(x,p) = sum over the shell of alpha(x, p', p); exact discrete shell sum.
AbsorptionField absorption_from_scattering(const ScatteringKernel &kernel);

// Collision right-hand side for the phase-space density: since H_r is
// constant on every shell, the Psi form equals the intensity form divided by
// c H_r, and is evaluated in the gain-minus-loss difference form
//   dPsi(p)/dt = sum_{p' in shell} alpha(x, p', p) (Psi(p') - Psi(p)),
// which vanishes exactly (in floating point) on shell-constant states.
DistributionField collision_rhs(const DistributionField &psi, const ScatteringKernel &kernel,
                                const SeparableHamiltonian &h);

struct CollisionDiagnostics {
  double energy_rate = 0.0;   // int H_r (dPsi/dt) = 0 up to roundoff
  double entropy_rate = 0.0;  // int (1/Psi) (dPsi/dt) >= 0
};
CollisionDiagnostics collision_diagnostics(const DistributionField &psi, const ScatteringKernel &kernel,
                                           const SeparableHamiltonian &h);

}  // namespace phasekin
