#pragma once

#include <functional>

#include "phasekin/hamiltonian.hpp"
#include "phasekin/kinetics.hpp"
#include "phasekin/sym_tensor.hpp"

namespace phasekin {

// Phase-space weight G(x,p) for weighted kinetic moments. The moment
// evolution equations assume [G,H] = 0; the flag is asserted by the caller
// and exact for the built-in weights (1 and H itself).
struct Weight {
  std::function<double(const Vec2 &, const Vec2 &)> eval;
  bool commutes_with_h = false;

  static Weight one() {
    return Weight{[](const Vec2 &, const Vec2 &) { return 1.0; }, true};
  }
  static Weight hamiltonian(const SeparableHamiltonian &h) {
    return Weight{[h](const Vec2 &x, const Vec2 &p) { return h(x, p); }, true};
  }
};

// k-th kinetic moment M^k[g](x) = int z^{(x)k} g dp with z = grad_p H.
SymTensorField kinetic_moment(const DistributionField &g, const SeparableHamiltonian &h, int k);

// k-th G-weighted kinetic moment, integrand z^{(x)k} g G. G == 1 reproduces
// kinetic_moment bitwise.
SymTensorField weighted_moment(const DistributionField &g, const SeparableHamiltonian &h, const Weight &w, int k);

// Both sides of the weighted moment evolution equation
//   d/dt G^k = -div_x G^{k+1} + source,
//   source = -int g G < z^{(x)(k-1)} (.) Hess_p(H) grad_x U > dp,
// with source == 0 for k = 0.
struct MomentEvolution {
  SymTensorField flux_divergence;
  SymTensorField source;
};
MomentEvolution moment_evolution_rhs(const DistributionField &g, const SeparableHamiltonian &h, const Weight &w,
                                     int k);

// Advances g by one transport step, finite-differences dM^k/dt and subtracts
// the analytic right-hand side; returns the L1 norm of the residual, which
// is O(dx + dt) for smooth data.
double verify_moment_consistency(const DistributionField &g, const SeparableHamiltonian &h, int k, double dt);

}  // namespace phasekin
