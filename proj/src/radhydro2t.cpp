#include "phasekin/radhydro2t.hpp"

#include <cmath>
#include <limits>

namespace phasekin {

TwoTempState::TwoTempState(ScalarField rho_, VectorField p, ScalarField e_e, ScalarField e_r)
    : rho(std::move(rho_)), P(std::move(p)), E_e(std::move(e_e)), E_r(std::move(e_r)) {
  if (!rho.grid.same(P.grid) || !rho.grid.same(E_e.grid) || !rho.grid.same(E_r.grid))
    throw GridError("TwoTempState: grid mismatch");
}

void TwoTempState::require_positive(const char *what) const {
  const SpatialGrid &g = grid();
  for (int i = 0; i < g.cells[0]; ++i)
    for (int j = 0; j < g.cells[1]; ++j) {
      if (!(rho(i, j) > 0.0) || !(E_e(i, j) > 0.0) || !(E_r(i, j) > 0.0))
        throw PositivityError(std::string(what) + ": nonpositive rho/E_e/E_r at cell (" + std::to_string(i) + "," +
                              std::to_string(j) + ")");
    }
}

std::pair<ScalarField, ScalarField> temperatures(const TwoTempState &state, const EquationOfState &eos) {
  state.require_positive("temperatures");
  const SpatialGrid &g = state.grid();
  ScalarField te(g), tr(g);
  for (std::size_t m = 0; m < te.v.size(); ++m) {
    te.v[m] = eos.T_e(state.rho.v[m], state.E_e.v[m]);
    tr.v[m] = eos.T_r(state.E_r.v[m]);
  }
  return {te, tr};
}

std::pair<ScalarField, ScalarField> pressures(const TwoTempState &state, const EquationOfState &eos) {
  state.require_positive("pressures");
  const SpatialGrid &g = state.grid();
  ScalarField pe(g), pr(g);
  for (std::size_t m = 0; m < pe.v.size(); ++m) {
    pe.v[m] = eos.p_e(state.E_e.v[m]);
    pr.v[m] = eos.p_r(state.E_r.v[m]);
  }
  return {pe, pr};
}

namespace {

void require_no_vacuum(const TwoTempState &s) {
  double rho_max = 0.0;
  for (double r : s.rho.v) rho_max = std::max(rho_max, r);
  for (int i = 0; i < s.grid().cells[0]; ++i)
    for (int j = 0; j < s.grid().cells[1]; ++j)
      if (s.rho(i, j) < 1e-12 * rho_max)
        throw Error("advection_rhs: vacuum cell (" + std::to_string(i) + "," + std::to_string(j) + ")");
}

double scal(const ScalarField &f, int i, int j) { return f(i, j); }

}  // namespace

TwoTempRhs advection_rhs(const TwoTempState &state, const EquationOfState &eos) {
  state.require_positive("advection_rhs");
  require_no_vacuum(state);
  const SpatialGrid &g = state.grid();
  TwoTempRhs out(g);

  auto [pe, pr] = pressures(state, eos);
  ScalarField ptot(g);
  for (std::size_t m = 0; m < ptot.v.size(); ++m) ptot.v[m] = pe.v[m] + pr.v[m];

  VectorField u(g);
  for (int i = 0; i < g.cells[0]; ++i)
    for (int j = 0; j < g.cells[1]; ++j) u.set(i, j, (1.0 / state.rho(i, j)) * state.P.at(i, j));

  // Upwind advective fluxes of rho, P and E_nu by the face velocity.
  for (int d = 0; d < g.dim; ++d) {
    const double inv = 1.0 / g.delta(d);
    // Face between (i,j) and its +1 neighbour along d.
    std::vector<double> f_rho(g.size()), f_p0(g.size()), f_p1(g.size()), f_ee(g.size()), f_er(g.size());
    for (int i = 0; i < g.cells[0]; ++i)
      for (int j = 0; j < g.cells[1]; ++j) {
        int ip = (d == 0) ? g.wrap(0, i + 1) : i;
        int jp = (d == 1) ? g.wrap(1, j + 1) : j;
        double uf = 0.5 * (u(i, j, d) + u(ip, jp, d));
        auto up = [&](const ScalarField &q) { return uf > 0.0 ? q(i, j) : q(ip, jp); };
        std::size_t f = g.index(i, j);
        f_rho[f] = uf * (uf > 0.0 ? state.rho(i, j) : state.rho(ip, jp));
        f_p0[f] = uf * (uf > 0.0 ? state.P(i, j, 0) : state.P(ip, jp, 0));
        f_p1[f] = uf * (uf > 0.0 ? state.P(i, j, 1) : state.P(ip, jp, 1));
        f_ee[f] = uf * up(state.E_e);
        f_er[f] = uf * up(state.E_r);
      }
    for (int i = 0; i < g.cells[0]; ++i)
      for (int j = 0; j < g.cells[1]; ++j) {
        int im = (d == 0) ? g.wrap(0, i - 1) : i;
        int jm = (d == 1) ? g.wrap(1, j - 1) : j;
        std::size_t f = g.index(i, j), fm = g.index(im, jm);
        out.drho(i, j) -= (f_rho[f] - f_rho[fm]) * inv;
        out.dP(i, j, 0) -= (f_p0[f] - f_p0[fm]) * inv;
        out.dP(i, j, 1) -= (f_p1[f] - f_p1[fm]) * inv;
        out.dE_e(i, j) -= (f_ee[f] - f_ee[fm]) * inv;
        out.dE_r(i, j) -= (f_er[f] - f_er[fm]) * inv;
      }
  }

  // Central pressure gradient and pdV work.
  for (int i = 0; i < g.cells[0]; ++i)
    for (int j = 0; j < g.cells[1]; ++j) {
      double divu = 0.0;
      for (int d = 0; d < g.dim; ++d) {
        out.dP(i, j, d) -= central_diff(ptot, i, j, d);
        int ip = g.wrap(d, (d == 0 ? i : j) + 1);
        int im = g.wrap(d, (d == 0 ? i : j) - 1);
        double up = (d == 0) ? u(ip, j, d) : u(i, ip, d);
        double um = (d == 0) ? u(im, j, d) : u(i, im, d);
        divu += (up - um) / (2.0 * g.delta(d));
      }
      out.dE_e(i, j) -= scal(pe, i, j) * divu;
      out.dE_r(i, j) -= scal(pr, i, j) * divu;
    }
  return out;
}

TwoTempRhs flux_rhs(const TwoTempState &state, const EquationOfState &eos, const TransportCoefficients &coeffs) {
  state.require_positive("flux_rhs");
  const SpatialGrid &g = state.grid();
  TwoTempRhs out(g);
  auto [te, tr] = temperatures(state, eos);

  for (int d = 0; d < g.dim; ++d) {
    const double inv = 1.0 / g.delta(d);
    std::vector<double> fe(g.size()), fr(g.size());
    for (int i = 0; i < g.cells[0]; ++i)
      for (int j = 0; j < g.cells[1]; ++j) {
        int ip = (d == 0) ? g.wrap(0, i + 1) : i;
        int jp = (d == 1) ? g.wrap(1, j + 1) : j;
        double k_l = coeffs.K_e(te(i, j)), k_r = coeffs.K_e(te(ip, jp));
        double d_l = coeffs.D(te(i, j)), d_r = coeffs.D(te(ip, jp));
        if (k_l < 0.0 || k_r < 0.0) throw Error("flux_rhs: negative electron conductivity");
        if (d_l < 0.0 || d_r < 0.0) throw Error("flux_rhs: negative radiation diffusion coefficient");
        // -F . n on the face: K dT/dn and D dE/dn.
        fe[g.index(i, j)] = 0.5 * (k_l + k_r) * (te(ip, jp) - te(i, j)) * inv;
        fr[g.index(i, j)] = 0.5 * (d_l + d_r) * (state.E_r(ip, jp) - state.E_r(i, j)) * inv;
      }
    for (int i = 0; i < g.cells[0]; ++i)
      for (int j = 0; j < g.cells[1]; ++j) {
        int im = (d == 0) ? g.wrap(0, i - 1) : i;
        int jm = (d == 1) ? g.wrap(1, j - 1) : j;
        out.dE_e(i, j) += (fe[g.index(i, j)] - fe[g.index(im, jm)]) * inv;
        out.dE_r(i, j) += (fr[g.index(i, j)] - fr[g.index(im, jm)]) * inv;
      }
  }
  return out;
}

TwoTempRhs interaction_rhs(const TwoTempState &state, const EquationOfState &eos,
                           const TransportCoefficients &coeffs) {
  state.require_positive("interaction_rhs");
  const SpatialGrid &g = state.grid();
  TwoTempRhs out(g);
  for (int i = 0; i < g.cells[0]; ++i)
    for (int j = 0; j < g.cells[1]; ++j) {
      double te = eos.T_e(state.rho(i, j), state.E_e(i, j));
      double tr = eos.T_r(state.E_r(i, j));
      double te2 = te * te, tr2 = tr * tr;
      double ger = coeffs.sigma_P(g.center(i, j), state.E_e(i, j), state.E_r(i, j)) * eos.a * coeffs.c *
                   (te2 * te2 - tr2 * tr2);
      out.dE_e(i, j) = -ger;
      out.dE_r(i, j) = ger;
    }
  return out;
}

std::array<double, 9> onsager_matrix(const TwoTempState &state, const EquationOfState &eos,
                                     const TransportCoefficients &coeffs, int i, int j) {
  double te = eos.T_e(state.rho(i, j), state.E_e(i, j));
  double tr = eos.T_r(state.E_r(i, j));
  std::array<double, 9> l{};
  l[4] = te * te * coeffs.K_e(te);
  l[8] = 4.0 * eos.a * std::pow(tr, 5) * coeffs.D(te);
  return l;
}

Diagnostics2T diagnostics_2t(const TwoTempState &state, const EquationOfState &eos,
                             const TransportCoefficients &coeffs) {
  state.require_positive("diagnostics_2t");
  const SpatialGrid &g = state.grid();
  auto [te, tr] = temperatures(state, eos);
  Diagnostics2T d;
  const double vol = g.cell_volume();
  for (int i = 0; i < g.cells[0]; ++i)
    for (int j = 0; j < g.cells[1]; ++j) {
      double rho = state.rho(i, j);
      Vec2 p = state.P.at(i, j);
      d.mass += rho * vol;
      d.momentum[0] += p[0] * vol;
      d.momentum[1] += p[1] * vol;
      d.energy += (0.5 * dot(p, p) / rho + state.E_e(i, j) + state.E_r(i, j)) * vol;
      d.entropy += (eos.sigma_e(rho, state.E_e(i, j)) + eos.sigma_r(state.E_r(i, j))) * vol;

      Vec2 gte = central_gradient(te, i, j);
      Vec2 gtr = central_gradient(tr, i, j);
      double tev = te(i, j), trv = tr(i, j);
      double ke = coeffs.K_e(tev), dr = coeffs.D(tev);
      d.flux_production += (dot(gte, gte) * ke / (tev * tev) + dot(gtr, gtr) * 4.0 * eos.a * trv * dr) * vol;
      // Interaction production with the factored, everywhere-smooth weight
      // T_e T_r sigma_P a c (T_e + T_r)(T_e^2 + T_r^2).
      double sp = coeffs.sigma_P(g.center(i, j), state.E_e(i, j), state.E_r(i, j));
      double weight = tev * trv * sp * eos.a * coeffs.c * (tev + trv) * (tev * tev + trv * trv);
      double force = 1.0 / tev - 1.0 / trv;
      d.interaction_production += force * force * weight * vol;

      d.max_grad_T_e = std::max(d.max_grad_T_e, norm(gte));
      d.max_grad_T_r = std::max(d.max_grad_T_r, norm(gtr));
      d.max_temp_gap = std::max(d.max_temp_gap, std::abs(tev - trv));
    }
  return d;
}

double advection_cfl_bound(const TwoTempState &state, const EquationOfState &eos) {
  const SpatialGrid &g = state.grid();
  double bound = std::numeric_limits<double>::infinity();
  for (int i = 0; i < g.cells[0]; ++i)
    for (int j = 0; j < g.cells[1]; ++j) {
      double rho = state.rho(i, j);
      double cs = std::sqrt((eos.gamma * eos.p_e(state.E_e(i, j)) + (4.0 / 3.0) * eos.p_r(state.E_r(i, j))) / rho);
      for (int d = 0; d < g.dim; ++d) {
        double speed = std::abs(state.P(i, j, d)) / rho + cs;
        if (speed > 0.0) bound = std::min(bound, g.delta(d) / speed);
      }
    }
  return bound;
}

double diffusion_stability_bound(const TwoTempState &state, const EquationOfState &eos,
                                 const TransportCoefficients &coeffs) {
  const SpatialGrid &g = state.grid();
  auto [te, tr] = temperatures(state, eos);
  double rate = 0.0;
  for (int i = 0; i < g.cells[0]; ++i)
    for (int j = 0; j < g.cells[1]; ++j) {
      double diff_e = coeffs.K_e(te(i, j)) / (state.rho(i, j) * eos.c_v);
      double diff_r = coeffs.D(te(i, j));
      double diff = std::max(diff_e, diff_r);
      double cell = 0.0;
      for (int d = 0; d < g.dim; ++d) cell += 2.0 * diff / (g.delta(d) * g.delta(d));
      rate = std::max(rate, cell);
    }
  return rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
}

namespace {

TwoTempState axpy(const TwoTempState &s, double a, const TwoTempRhs &r) {
  TwoTempState out = s;
  for (std::size_t m = 0; m < out.rho.v.size(); ++m) out.rho.v[m] += a * r.drho.v[m];
  for (std::size_t m = 0; m < out.P.v.size(); ++m) out.P.v[m] += a * r.dP.v[m];
  for (std::size_t m = 0; m < out.E_e.v.size(); ++m) out.E_e.v[m] += a * r.dE_e.v[m];
  for (std::size_t m = 0; m < out.E_r.v.size(); ++m) out.E_r.v[m] += a * r.dE_r.v[m];
  return out;
}

TwoTempState advection_substep(const TwoTempState &s, double dt, const EquationOfState &eos) {
  double bound = advection_cfl_bound(s, eos);
  if (dt > 0.9 * bound)
    throw CflError("step_2t: advection dt " + std::to_string(dt) + " exceeds 0.9 * CFL bound " +
                   std::to_string(bound));
  // RK4 keeps the centrally differenced acoustic terms inside the stability
  // region.
  TwoTempRhs k1 = advection_rhs(s, eos);
  TwoTempRhs k2 = advection_rhs(axpy(s, 0.5 * dt, k1), eos);
  TwoTempRhs k3 = advection_rhs(axpy(s, 0.5 * dt, k2), eos);
  TwoTempRhs k4 = advection_rhs(axpy(s, dt, k3), eos);
  TwoTempState out = s;
  auto add = [&](std::vector<double> &v, const std::vector<double> &a1, const std::vector<double> &a2,
                 const std::vector<double> &a3, const std::vector<double> &a4) {
    for (std::size_t m = 0; m < v.size(); ++m) v[m] += dt / 6.0 * (a1[m] + 2.0 * a2[m] + 2.0 * a3[m] + a4[m]);
  };
  add(out.rho.v, k1.drho.v, k2.drho.v, k3.drho.v, k4.drho.v);
  add(out.P.v, k1.dP.v, k2.dP.v, k3.dP.v, k4.dP.v);
  add(out.E_e.v, k1.dE_e.v, k2.dE_e.v, k3.dE_e.v, k4.dE_e.v);
  add(out.E_r.v, k1.dE_r.v, k2.dE_r.v, k3.dE_r.v, k4.dE_r.v);
  out.require_positive("step_2t advection substep");
  return out;
}

// Backward Euler for one diffusion equation with frozen face coefficients:
// (I - dt L) x = b, L the conservative centered stencil; CG (L is symmetric
// and the system is SPD).
void implicit_diffuse(const SpatialGrid &g, std::vector<double> &x, const std::vector<double> &face0,
                      const std::vector<double> &face1, double dt) {
  auto apply = [&](const std::vector<double> &in, std::vector<double> &out) {
    for (int i = 0; i < g.cells[0]; ++i)
      for (int j = 0; j < g.cells[1]; ++j) {
        double acc = 0.0;
        {
          int ip = g.wrap(0, i + 1), im = g.wrap(0, i - 1);
          double inv2 = 1.0 / (g.delta(0) * g.delta(0));
          acc += (face0[g.index(i, j)] * (in[g.index(ip, j)] - in[g.index(i, j)]) -
                  face0[g.index(im, j)] * (in[g.index(i, j)] - in[g.index(im, j)])) *
                 inv2;
        }
        if (g.dim == 2) {
          int jp = g.wrap(1, j + 1), jm = g.wrap(1, j - 1);
          double inv2 = 1.0 / (g.delta(1) * g.delta(1));
          acc += (face1[g.index(i, j)] * (in[g.index(i, jp)] - in[g.index(i, j)]) -
                  face1[g.index(i, jm)] * (in[g.index(i, j)] - in[g.index(i, jm)])) *
                 inv2;
        }
        out[g.index(i, j)] = in[g.index(i, j)] - dt * acc;
      }
  };
  std::vector<double> b = x, r(x.size()), p(x.size()), ap(x.size());
  apply(x, r);
  for (std::size_t m = 0; m < r.size(); ++m) r[m] = b[m] - r[m];
  p = r;
  double rr = 0.0;
  for (double t : r) rr += t * t;
  double b2 = 0.0;
  for (double t : b) b2 += t * t;
  const double tol2 = 1e-28 * std::max(b2, 1e-300);
  for (std::size_t it = 0; it < 4 * x.size() && rr > tol2; ++it) {
    apply(p, ap);
    double pap = 0.0;
    for (std::size_t m = 0; m < p.size(); ++m) pap += p[m] * ap[m];
    if (pap <= 0.0) break;
    double alpha = rr / pap;
    for (std::size_t m = 0; m < x.size(); ++m) {
      x[m] += alpha * p[m];
      r[m] -= alpha * ap[m];
    }
    double rr2 = 0.0;
    for (double t : r) rr2 += t * t;
    double beta = rr2 / rr;
    rr = rr2;
    for (std::size_t m = 0; m < x.size(); ++m) p[m] = r[m] + beta * p[m];
  }
}

TwoTempState flux_substep(const TwoTempState &s, double dt, const EquationOfState &eos,
                          const TransportCoefficients &coeffs, bool implicit) {
  TwoTempState out = s;
  if (!implicit) {
    double bound = diffusion_stability_bound(s, eos, coeffs);
    if (dt > bound)
      throw CflError("step_2t: explicit diffusion dt " + std::to_string(dt) + " exceeds stability bound " +
                     std::to_string(bound) + "; reduce dt or enable implicit diffusion");
    TwoTempRhs r = flux_rhs(s, eos, coeffs);
    for (std::size_t m = 0; m < out.E_e.v.size(); ++m) out.E_e.v[m] += dt * r.dE_e.v[m];
    for (std::size_t m = 0; m < out.E_r.v.size(); ++m) out.E_r.v[m] += dt * r.dE_r.v[m];
  } else {
    const SpatialGrid &g = s.grid();
    auto [te, tr] = temperatures(s, eos);
    // E_e diffuses through T_e = E_e / (rho c_v): fold the inverse heat
    // capacity into the face coefficient, frozen at substep start.
    std::vector<double> fe0(g.size()), fe1(g.size()), fr0(g.size()), fr1(g.size());
    for (int d = 0; d < g.dim; ++d)
      for (int i = 0; i < g.cells[0]; ++i)
        for (int j = 0; j < g.cells[1]; ++j) {
          int ip = (d == 0) ? g.wrap(0, i + 1) : i;
          int jp = (d == 1) ? g.wrap(1, j + 1) : j;
          double ke = 0.5 * (coeffs.K_e(te(i, j)) + coeffs.K_e(te(ip, jp)));
          double cv = 0.5 * (s.rho(i, j) + s.rho(ip, jp)) * eos.c_v;
          double dr = 0.5 * (coeffs.D(te(i, j)) + coeffs.D(te(ip, jp)));
          (d == 0 ? fe0 : fe1)[g.index(i, j)] = ke / cv;
          (d == 0 ? fr0 : fr1)[g.index(i, j)] = dr;
        }
    implicit_diffuse(g, out.E_e.v, fe0, fe1, dt);
    implicit_diffuse(g, out.E_r.v, fr0, fr1, dt);
  }
  out.require_positive("step_2t flux substep");
  return out;
}

TwoTempState interaction_substep(const TwoTempState &s, double dt, const EquationOfState &eos,
                                 const TransportCoefficients &coeffs) {
  // Per-cell ODE dE_e/dt = -G_er, dE_r/dt = +G_er; RK4 with deterministic
  // subcycling so no stage can push an energy across zero.
  const SpatialGrid &g = s.grid();
  double rate = 0.0;
  TwoTempRhs r0 = interaction_rhs(s, eos, coeffs);
  for (int i = 0; i < g.cells[0]; ++i)
    for (int j = 0; j < g.cells[1]; ++j) {
      double gmag = std::abs(r0.dE_r(i, j));
      double limit = 0.2 * std::min(s.E_e(i, j), s.E_r(i, j));
      if (limit > 0.0) rate = std::max(rate, gmag / limit);
    }
  int nsub = std::max(1, int(std::ceil(dt * rate)));
  double h = dt / nsub;
  TwoTempState out = s;
  for (int step = 0; step < nsub; ++step) {
    TwoTempRhs k1 = interaction_rhs(out, eos, coeffs);
    TwoTempRhs k2 = interaction_rhs(axpy(out, 0.5 * h, k1), eos, coeffs);
    TwoTempRhs k3 = interaction_rhs(axpy(out, 0.5 * h, k2), eos, coeffs);
    TwoTempRhs k4 = interaction_rhs(axpy(out, h, k3), eos, coeffs);
    for (std::size_t m = 0; m < out.E_e.v.size(); ++m)
      out.E_e.v[m] += h / 6.0 * (k1.dE_e.v[m] + 2.0 * k2.dE_e.v[m] + 2.0 * k3.dE_e.v[m] + k4.dE_e.v[m]);
    for (std::size_t m = 0; m < out.E_r.v.size(); ++m)
      out.E_r.v[m] += h / 6.0 * (k1.dE_r.v[m] + 2.0 * k2.dE_r.v[m] + 2.0 * k3.dE_r.v[m] + k4.dE_r.v[m]);
  }
  out.require_positive("step_2t interaction substep");
  return out;
}

}  // namespace

TwoTempState step_2t(const TwoTempState &state, double dt, const EquationOfState &eos,
                     const TransportCoefficients &coeffs, const Step2TOptions &options) {
  state.require_positive("step_2t");
  if (!(dt > 0.0)) throw Error("step_2t: dt must be positive");
  if (!options.strang) {
    TwoTempState s1 = advection_substep(state, dt, eos);
    TwoTempState s2 = flux_substep(s1, dt, eos, coeffs, options.implicit_diffusion);
    return interaction_substep(s2, dt, eos, coeffs);
  }
  TwoTempState s1 = advection_substep(state, 0.5 * dt, eos);
  TwoTempState s2 = flux_substep(s1, 0.5 * dt, eos, coeffs, options.implicit_diffusion);
  TwoTempState s3 = interaction_substep(s2, dt, eos, coeffs);
  TwoTempState s4 = flux_substep(s3, 0.5 * dt, eos, coeffs, options.implicit_diffusion);
  return advection_substep(s4, 0.5 * dt, eos);
}

}  // namespace phasekin
