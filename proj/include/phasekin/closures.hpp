#pragma once

#include <optional>

#include "phasekin/hamiltonian.hpp"
#include "phasekin/kinetics.hpp"
#include "phasekin/sym_tensor.hpp"

namespace phasekin {

// State of the variable moment closure on the auxiliary truncated moment
// space: (M0, phi) for degree m = 0, (M0, P0, phi) for m = 1. The auxiliary
// potential phi is stored as a periodic array plus an affine background
// slope, so quasi-periodic potentials (periodic gradient, e.g. phi = x) are
// representable on the periodic grid; the dynamics depend on phi only
// through its gradient and the slope is constant in time.
struct ClosureState {
  int degree = 0;  // m in {0, 1}
  ScalarField M0;
  VectorField P0;  // present iff degree == 1
  ScalarField phi;
  Vec2 phi_slope{0.0, 0.0};
  SeparableHamiltonian h;

  ClosureState(ScalarField m0, ScalarField phi_, SeparableHamiltonian h_, Vec2 slope = {0.0, 0.0});
  ClosureState(ScalarField m0, VectorField p0, ScalarField phi_, SeparableHamiltonian h_, Vec2 slope = {0.0, 0.0});

  const SpatialGrid &grid() const { return M0.grid; }
  Vec2 grad_phi(int i, int j) const { return phi_slope + central_gradient(phi, i, j); }
};

struct ClosureRhs {
  ScalarField dM0;
  VectorField dP0;  // zero-size unless degree == 1
  ScalarField dphi;
};

// Hamilton-Jacobi right-hand side dphi/dt = H(x, -grad phi), evaluated with
// the monotone local Lax-Friedrichs numerical Hamiltonian built from
// one-sided gradients. Radiation requires |grad phi| >= eps_grad everywhere.
ScalarField hj_rhs(const ScalarField &phi, const SeparableHamiltonian &h, Vec2 phi_slope = {0.0, 0.0});

// dM0/dt = -div(M0 z(-grad phi)) by upwinded finite-volume fluxes,
// dphi/dt = hj_rhs.
ClosureRhs closure0_rhs(const ClosureState &state);

// Degree-two closure dynamics: the M0 flux gains the Hessian term
// Hess_p(H) . P0, and P0 evolves by one-form-density advection along
// w = z(-grad phi); central differences, upwinding on the advective term.
ClosureRhs closure1_rhs(const ClosureState &state);

// Closure moments: images of the state under the Gamma map.
VectorField m1_from_state0(const ClosureState &state);
VectorField m1_from_state1(const ClosureState &state);
SymTensorField m2_from_state1(const ClosureState &state);

// Coefficient data (M0, P0^1..P0^m, phi) of a Gamma_m image, m <= 3.
struct GammaImageSpec {
  int degree = 0;
  ScalarField M0;
  std::vector<SymTensorField> P;  // degrees 1..m
  ScalarField phi;
  Vec2 phi_slope{0.0, 0.0};
  SeparableHamiltonian h;

  GammaImageSpec(int m, ScalarField m0, std::vector<SymTensorField> p, ScalarField phi_, SeparableHamiltonian h_,
                 Vec2 slope = {0.0, 0.0});
  const SpatialGrid &grid() const { return M0.grid; }
};

// k-th kinetic moment of the Gamma_m image, the delta-derivative integrals
// evaluated in closed form by transferring p-derivatives to the moment
// kernel. Radiation rejects m >= 2 with k >= 1: those terms need third
// p-derivatives of H, which are zero only for the quadratic kinetic energy.
SymTensorField gamma_moment(const GammaImageSpec &spec, int k);

// Solves grad phi = -P on the periodic grid; the additive constant is fixed
// by zero mean. 1D requires zero-mean P; 2D requires discretely curl-free P.
ScalarField init_phi_from_momentum(const VectorField &p);

// |M[Gamma_{p+1}; s] - M[Gamma_p; s]| with the moment generating function
// expanded through order 3 in s; returns the L1 norm over Q. The gap scales
// as |s|^{p+1}.
double generating_function_gap(const GammaImageSpec &spec_p, const GammaImageSpec &spec_p1, const Vec2 &s);

double closure_cfl_bound(const ClosureState &state);

// One explicit step; mass sum of M0 is conserved to roundoff (divergence
// form, periodic).
ClosureState step_closure(const ClosureState &state, double dt, TimeScheme scheme = TimeScheme::RK2);

// Collective Hamiltonian H^m = int H(x,-grad phi) M0 dx (+ int P0 . z dx for
// m = 1); invariant of the exact closure flow.
double collective_hamiltonian(const ClosureState &state);

double closure_mass(const ClosureState &state);

}  // namespace phasekin
