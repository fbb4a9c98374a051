#pragma once

#include <array>
#include <functional>

#include "phasekin/grid.hpp"
#include "phasekin/kinetics.hpp"

namespace phasekin {

// Gamma-law electron branch and blackbody radiation branch. Both entropy
// densities satisfy the first law dSigma = dE/T - (F/T) drho exactly and
// produce the standard closed-form pressures.
struct EquationOfState {
  double gamma = 5.0 / 3.0;  // electron adiabatic index, > 1
  double c_v = 1.0;          // electron specific heat, > 0
  double a = 1.0;            // radiation constant in E_r = a T_r^4, > 0

  EquationOfState() = default;
  EquationOfState(double gamma_, double c_v_, double a_) : gamma(gamma_), c_v(c_v_), a(a_) {
    if (!(gamma > 1.0) || !(c_v > 0.0) || !(a > 0.0)) throw Error("EquationOfState: invalid parameters");
  }

  double T_e(double rho, double E_e) const { return E_e / (rho * c_v); }
  double T_r(double E_r) const { return std::pow(E_r / a, 0.25); }
  double sigma_e(double rho, double E_e) const { return rho * c_v * std::log(E_e * std::pow(rho, -gamma)); }
  double sigma_r(double E_r) const { return (4.0 / 3.0) * std::pow(a, 0.25) * std::pow(E_r, 0.75); }
  double p_e(double E_e) const { return (gamma - 1.0) * E_e; }
  double p_r(double E_r) const { return E_r / 3.0; }
  // Entropy partials, used by the pressure formula and its verification.
  double dsigma_e_dE(double rho, double E_e) const { return rho * c_v / E_e; }
  double dsigma_e_drho(double rho, double E_e) const {
    return c_v * std::log(E_e * std::pow(rho, -gamma)) - gamma * c_v;
  }
  double dsigma_r_dE(double E_r) const { return std::pow(a, 0.25) * std::pow(E_r, -0.25); }
};

struct TransportCoefficients {
  std::function<double(double)> K_e;                        // electron conductivity of T_e, >= 0
  std::function<double(double)> D;                          // radiation diffusion coefficient of T_e, >= 0
  std::function<double(const Vec2 &, double, double)> sigma_P;  // opacity of (x, E_e, E_r), > 0
  double c = 1.0;                                           // speed of light in G_er

  static TransportCoefficients constant(double k_e, double d, double sigma, double c_light = 1.0) {
    TransportCoefficients t;
    t.K_e = [k_e](double) { return k_e; };
    t.D = [d](double) { return d; };
    t.sigma_P = [sigma](const Vec2 &, double, double) { return sigma; };
    t.c = c_light;
    return t;
  }
  // Power laws K_e = k0 T_e^alpha, D = d0 T_e^beta, sigma_P = s0.
  static TransportCoefficients power_law(double k0, double alpha, double d0, double beta, double s0,
                                         double c_light = 1.0) {
    TransportCoefficients t;
    t.K_e = [k0, alpha](double T) { return k0 * std::pow(T, alpha); };
    t.D = [d0, beta](double T) { return d0 * std::pow(T, beta); };
    t.sigma_P = [s0](const Vec2 &, double, double) { return s0; };
    t.c = c_light;
    return t;
  }
};

struct TwoTempState {
  ScalarField rho;
  VectorField P;
  ScalarField E_e;
  ScalarField E_r;

  TwoTempState() = default;
  TwoTempState(ScalarField rho_, VectorField p, ScalarField e_e, ScalarField e_r);
  const SpatialGrid &grid() const { return rho.grid; }
  void require_positive(const char *what) const;
};

struct TwoTempRhs {
  ScalarField drho;
  VectorField dP;
  ScalarField dE_e;
  ScalarField dE_r;

  explicit TwoTempRhs(const SpatialGrid &g) : drho(g), dP(g), dE_e(g), dE_r(g) {}
};

std::pair<ScalarField, ScalarField> temperatures(const TwoTempState &state, const EquationOfState &eos);
std::pair<ScalarField, ScalarField> pressures(const TwoTempState &state, const EquationOfState &eos);

// Advection part of the 2T system: upwind finite-volume fluxes by the face
// velocity u = P/rho, central pressure gradient and pdV sources.
TwoTempRhs advection_rhs(const TwoTempState &state, const EquationOfState &eos);

// Thermal flux part: dE_e += div(K_e grad T_e), dE_r += div(D grad E_r);
// conservative centered stencils, so the total of E_e + E_r is exact.
TwoTempRhs flux_rhs(const TwoTempState &state, const EquationOfState &eos, const TransportCoefficients &coeffs);

// Thermal interaction: dE_e -= G_er, dE_r += G_er with
// G_er = sigma_P a c (T_e^4 - T_r^4); pointwise.
TwoTempRhs interaction_rhs(const TwoTempState &state, const EquationOfState &eos,
                           const TransportCoefficients &coeffs);

// Onsager matrix diag(0, T_e^2 K_e, 4 a T_r^5 D) at one cell, row-major.
std::array<double, 9> onsager_matrix(const TwoTempState &state, const EquationOfState &eos,
                                     const TransportCoefficients &coeffs, int i, int j);

struct Diagnostics2T {
  double mass = 0.0;
  Vec2 momentum{0.0, 0.0};
  double energy = 0.0;   // int (|P|^2 / 2 rho + E_e + E_r)
  double entropy = 0.0;  // int (Sigma_e + Sigma_r)
  double flux_production = 0.0;
  double interaction_production = 0.0;
  double max_grad_T_e = 0.0;
  double max_grad_T_r = 0.0;
  double max_temp_gap = 0.0;
};
Diagnostics2T diagnostics_2t(const TwoTempState &state, const EquationOfState &eos,
                             const TransportCoefficients &coeffs);

double advection_cfl_bound(const TwoTempState &state, const EquationOfState &eos);
double diffusion_stability_bound(const TwoTempState &state, const EquationOfState &eos,
                                 const TransportCoefficients &coeffs);

struct Step2TOptions {
  bool strang = true;             // Strang A(h/2) F(h/2) I(h) F(h/2) A(h/2); else A F I
  bool implicit_diffusion = false;  // backward Euler flux substep
};

// Operator-split step advection -> flux -> interaction. Positivity of rho,
// E_e, E_r is checked after every substep; violations abort with the cell.
TwoTempState step_2t(const TwoTempState &state, double dt, const EquationOfState &eos,
                     const TransportCoefficients &coeffs, const Step2TOptions &options = {});

}  // namespace phasekin
