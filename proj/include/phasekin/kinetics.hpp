#pragma once

#include "phasekin/grid.hpp"
#include "phasekin/hamiltonian.hpp"

namespace phasekin {

enum class TimeScheme { Euler, RK2, RK4 };

// Discrete canonical Poisson bracket [F,G] = dF/dx . dG/dp - dG/dx . dF/dp,
// central differences, periodic in x, one-sided at the p boundary. The same
// difference operators are applied to both arguments, so antisymmetry holds
// exactly at the discrete level.
DistributionField poisson_bracket(const DistributionField &f, const DistributionField &g);

// Right-hand side of the transport equation in divergence form,
//   dg/dt = -div_x(g z) + div_p(g grad_x U),
// first-order upwind fluxes, periodic in x, zero inflow in p.
DistributionField transport_rhs(const DistributionField &g, const SeparableHamiltonian &h);

// Largest stable time step scale: min(dx / max|z|, dp / max|grad U|).
double transport_cfl_bound(const PhaseGrid &grid, const SeparableHamiltonian &h);

// One explicit step of the transport equation. Throws CflError when |dt|
// exceeds 0.9 times the CFL bound.
DistributionField step_transport(const DistributionField &g, const SeparableHamiltonian &h, double dt,
                                 TimeScheme scheme = TimeScheme::RK2);

double total_mass(const DistributionField &g);
double total_energy(const DistributionField &g, const SeparableHamiltonian &h);
Vec2 total_momentum(const DistributionField &g);

// Wave entropy S[Psi] = int log(Psi); requires Psi > 0 everywhere.
double wave_entropy(const DistributionField &psi);
// Boltzmann entropy S[f] = int f log f with 0 log 0 = 0; requires f >= 0.
double boltzmann_entropy(const DistributionField &f);

// Specific intensity I = c H_r Psi; radiation Hamiltonians only.
DistributionField intensity_from_density(const DistributionField &psi, const SeparableHamiltonian &h);

}  // namespace phasekin
