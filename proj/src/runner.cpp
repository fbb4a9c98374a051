#include "phasekin/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "phasekin/moments.hpp"

namespace phasekin {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }

void add_verdict(RunReport &r, const std::string &name, double measured, double tol) {
  r.verdicts.push_back({name, measured, tol, measured <= tol});
}

bool wants(const Scenario &s, const std::string &check) {
  return std::find(s.checks.begin(), s.checks.end(), check) != s.checks.end();
}

struct SeriesWriter {
  RunReport &report;
  explicit SeriesWriter(RunReport &r, std::vector<std::string> cols) : report(r) { report.columns = std::move(cols); }
  void row(std::initializer_list<double> values) { report.rows.emplace_back(values); }
};

ScalarField scalar_from_profile(const SpatialGrid &g, const Profile &p) {
  return ScalarField::from(g, [&](const Vec2 &x) { return p.eval(x, g); });
}

// ---------------------------------------------------------------- kinetic --

DistributionField kinetic_initial(const Scenario &s, const PhaseGrid &g) {
  const Profile &px = s.initial.at("g_x");
  const Profile &pp = s.initial.at("g_p");
  // Product profile g(x, p) = gx(x) gp(p); the p factor is evaluated on the
  // momentum axes of the phase grid.
  SpatialGrid pgrid(g.dim(), g.p_cells, g.p_extent);
  return DistributionField::from(
      g, [&](const Vec2 &x, const Vec2 &p) { return px.eval(x, g.space) * pp.eval(p, pgrid); });
}

RunReport run_kinetic(const Scenario &s) {
  RunReport rep;
  PhaseGrid grid = s.phase_grid();
  SeparableHamiltonian ham = s.hamiltonian();
  DistributionField g = kinetic_initial(s, grid);
  g.require_finite("run: initial data");

  const bool radiation = ham.is_radiation();
  std::optional<ScatteringKernel> kernel;
  if (s.isotropic_sigma || !s.shell_matrices.empty()) {
    if (!radiation) throw Error("run: collisions require a radiation Hamiltonian");
    if (s.isotropic_sigma) {
      Profile sigma = *s.isotropic_sigma;
      SpatialGrid sg = grid.space;
      kernel = ScatteringKernel::isotropic(grid, [sigma, sg](const Vec2 &x) { return sigma.eval(x, sg); });
    } else {
      kernel.emplace(grid);
      for (const auto &[shell, mat] : s.shell_matrices) {
        if (shell < 0 || shell >= int(kernel->shells.size()))
          throw Error("run: shell_matrices index " + std::to_string(shell) + " out of range (grid has " +
                      std::to_string(kernel->shells.size()) + " shells)");
        if (mat.size() != kernel->shells[shell].size())
          throw Error("run: shell_matrices[" + std::to_string(shell) + "] size " + std::to_string(mat.size()) +
                      " does not match shell size " + std::to_string(kernel->shells[shell].size()));
        for (int i = 0; i < grid.space.cells[0]; ++i)
          for (int j = 0; j < grid.space.cells[1]; ++j)
            for (std::size_t a = 0; a < mat.size(); ++a)
              for (std::size_t b = a; b < mat.size(); ++b) kernel->set(i, j, shell, int(a), int(b), mat[a][b]);
      }
    }
    if (kernel->singleton_shell_count() > 0)
      rep.warnings.push_back("degenerate configuration: " + std::to_string(kernel->singleton_shell_count()) +
                             " singleton momentum shells; collisions act as absorption+gain (net zero) there");
  }

  double dt = s.dt ? *s.dt : *s.cfl * transport_cfl_bound(grid, ham);
  if (kernel) {
    AbsorptionField a = absorption_from_scattering(*kernel);
    double amax = 0.0;
    for (double x : a.v) amax = std::max(amax, x);
    if (amax > 0.0) dt = std::min(dt, 0.5 / amax);
  }

  auto collide = [&](DistributionField &f, double h) {
    if (!kernel) return;
    DistributionField k1 = collision_rhs(f, *kernel, ham);
    DistributionField tmp = f;
    for (std::size_t m = 0; m < tmp.v.size(); ++m) tmp.v[m] += 0.5 * h * k1.v[m];
    DistributionField k2 = collision_rhs(tmp, *kernel, ham);
    for (std::size_t m = 0; m < f.v.size(); ++m) f.v[m] += h * k2.v[m];
  };

  SeriesWriter w(rep, {"time", "mass", "energy", "momentum_x", "momentum_y", "entropy", "min_g"});
  auto entropy_of = [&](const DistributionField &f) {
    if (radiation) {
      for (double x : f.v)
        if (!(x > 0.0)) return std::nan("");
      return wave_entropy(f);
    }
    for (double x : f.v)
      if (x < 0.0) return std::nan("");
    return boltzmann_entropy(f);
  };
  auto emit = [&](double t, const DistributionField &f) {
    Vec2 mom = total_momentum(f);
    double mn = f.v.empty() ? 0.0 : *std::min_element(f.v.begin(), f.v.end());
    w.row({t, total_mass(f), total_energy(f, ham), mom[0], mom[1], entropy_of(f), mn});
  };

  const double mass0 = total_mass(g);
  const double energy0 = total_energy(g, ham);
  double entropy_min_step = 0.0;
  emit(0.0, g);
  double t = 0.0;
  long step = 0;
  double prev_entropy = entropy_of(g);
  while (t < s.t_end - 1e-12 * s.t_end) {
    double h = std::min(dt, s.t_end - t);
    try {
      collide(g, 0.5 * h);
      g = step_transport(g, ham, h, s.scheme);
      collide(g, 0.5 * h);
    } catch (const Error &e) {
      throw Error(std::string(e.what()) + " [at t = " + format_double(t) + "]");
    }
    t += h;
    ++step;
    double e = entropy_of(g);
    if (!std::isnan(e) && !std::isnan(prev_entropy)) entropy_min_step = std::min(entropy_min_step, e - prev_entropy);
    prev_entropy = e;
    if (step % s.cadence == 0 || t >= s.t_end - 1e-12 * s.t_end) emit(t, g);
  }

  rep.field_columns = {"x", "y", "p_x", "p_y", "g"};
  for (int i = 0; i < grid.space.cells[0]; ++i)
    for (int j = 0; j < grid.space.cells[1]; ++j)
      for (int k = 0; k < grid.p_cells[0]; ++k)
        for (int l = 0; l < grid.p_cells[1]; ++l) {
          Vec2 x = grid.space.center(i, j);
          Vec2 p = grid.p_center(k, l);
          rep.field_rows.push_back({x[0], x[1], p[0], p[1], g(i, j, k, l)});
        }

  double gmax = 0.0;
  for (double x : g.v) gmax = std::max(gmax, std::abs(x));
  double gmin = *std::min_element(g.v.begin(), g.v.end());

  add_verdict(rep, "mass_conservation", rel_diff(total_mass(g), mass0), 1e-12);
  if (wants(s, "positivity")) add_verdict(rep, "positivity", std::max(0.0, -gmin), 1e-15 * std::max(1.0, gmax));
  if (wants(s, "energy_conservation"))
    add_verdict(rep, "energy_conservation", rel_diff(total_energy(g, ham), energy0), 1e-12);
  if (wants(s, "entropy_monotone"))
    add_verdict(rep, "entropy_monotone", std::max(0.0, -entropy_min_step), 1e-12 * std::max(1.0, std::abs(prev_entropy)));
  if (wants(s, "collision_energy_rate") && kernel) {
    CollisionDiagnostics d = collision_diagnostics(g, *kernel, ham);
    double scale = std::max(1.0, std::abs(total_energy(g, ham)));
    add_verdict(rep, "collision_energy_rate", std::abs(d.energy_rate), 1e-12 * scale);
    add_verdict(rep, "collision_entropy_rate", std::max(0.0, -d.entropy_rate), 1e-12 * scale);
  }
  if (wants(s, "free_streaming_l1")) {
    if (!radiation) throw Error("run: free_streaming_l1 needs a radiation Hamiltonian");
    // L1 distance to the exact translate g0(x - c sign(p) t, p), periodic.
    const Profile &px = s.initial.at("g_x");
    const Profile &pp = s.initial.at("g_p");
    SpatialGrid pgrid(grid.dim(), grid.p_cells, grid.p_extent);
    double l1 = 0.0;
    for (int i = 0; i < grid.space.cells[0]; ++i)
      for (int j = 0; j < grid.space.cells[1]; ++j)
        for (int k = 0; k < grid.p_cells[0]; ++k)
          for (int l = 0; l < grid.p_cells[1]; ++l) {
            Vec2 p = grid.p_center(k, l);
            if (grid.dim() == 1) p[1] = 0.0;
            Vec2 om = (1.0 / norm(p)) * p;
            Vec2 x = grid.space.center(i, j);
            for (int d = 0; d < grid.dim(); ++d) {
              double len = grid.space.extent[d].length();
              x[d] -= s.c_light * om[d] * s.t_end;
              while (x[d] < grid.space.extent[d].lo) x[d] += len;
              while (x[d] >= grid.space.extent[d].hi) x[d] -= len;
            }
            double exact = px.eval(x, grid.space) * pp.eval(p, pgrid);
            l1 += std::abs(g(i, j, k, l) - exact);
          }
    l1 *= grid.cell_volume();
    rep.metrics.emplace_back("l1_error", l1);
    rep.metrics.emplace_back("h", grid.space.delta(0));
    add_verdict(rep, "free_streaming_l1_finite", std::isfinite(l1) ? 0.0 : 1.0, 0.5);
  }
  return rep;
}

// ---------------------------------------------------------------- closure --

ClosureState closure_initial(const Scenario &s) {
  SpatialGrid grid = s.spatial_grid();
  SeparableHamiltonian ham = s.hamiltonian();
  ScalarField m0 = scalar_from_profile(grid, s.initial.at("M0"));

  ScalarField phi(grid);
  Vec2 slope{0.0, 0.0};
  if (s.initial.count("phi")) {
    const Profile &pp = s.initial.at("phi");
    if (pp.name == "linear") {
      slope[0] = pp.param("slope", 1.0);
      slope[1] = pp.param("slope_y", 0.0);
    } else {
      phi = scalar_from_profile(grid, pp);
    }
  } else if (s.initial.count("velocity")) {
    // grad phi = -m u for the matter Hamiltonian.
    const Profile &pu = s.initial.at("velocity");
    VectorField mu(grid);
    for (int i = 0; i < grid.cells[0]; ++i)
      for (int j = 0; j < grid.cells[1]; ++j) mu(i, j, 0) = s.mass * pu.eval(grid.center(i, j), grid);
    phi = init_phi_from_momentum(mu);
  } else {
    throw Error("run: closure scenarios need initial.phi or initial.velocity");
  }

  if (s.kind == ScenarioKind::Closure1) {
    VectorField p0(grid);
    const Profile &pp0 = s.initial.at("P0");
    for (int i = 0; i < grid.cells[0]; ++i)
      for (int j = 0; j < grid.cells[1]; ++j) p0(i, j, 0) = pp0.eval(grid.center(i, j), grid);
    return ClosureState(std::move(m0), std::move(p0), std::move(phi), ham, slope);
  }
  return ClosureState(std::move(m0), std::move(phi), ham, slope);
}

RunReport run_closure(const Scenario &s) {
  RunReport rep;
  ClosureState state = closure_initial(s);
  double dt = s.dt ? *s.dt : *s.cfl * closure_cfl_bound(state);

  SeriesWriter w(rep, {"time", "mass", "collective_hamiltonian", "min_M0", "max_grad_phi"});
  auto emit = [&](double t) {
    double gmax = 0.0;
    const SpatialGrid &g = state.grid();
    for (int i = 0; i < g.cells[0]; ++i)
      for (int j = 0; j < g.cells[1]; ++j) gmax = std::max(gmax, norm(state.grad_phi(i, j)));
    w.row({t, closure_mass(state), collective_hamiltonian(state),
           *std::min_element(state.M0.v.begin(), state.M0.v.end()), gmax});
  };

  const double mass0 = closure_mass(state);
  const double h0 = collective_hamiltonian(state);
  emit(0.0);
  double t = 0.0;
  long step = 0;
  while (t < s.t_end - 1e-12 * s.t_end) {
    double h = std::min(dt, s.t_end - t);
    try {
      state = step_closure(state, h, s.scheme);
    } catch (const Error &e) {
      throw Error(std::string(e.what()) + " [at t = " + format_double(t) + "]");
    }
    t += h;
    ++step;
    if (step % s.cadence == 0 || t >= s.t_end - 1e-12 * s.t_end) emit(t);
  }

  rep.field_columns = {"x", "y", "M0", "phi", "P0_x", "P0_y"};
  {
    const SpatialGrid &g = state.grid();
    for (int i = 0; i < g.cells[0]; ++i)
      for (int j = 0; j < g.cells[1]; ++j) {
        Vec2 x = g.center(i, j);
        double p0x = state.degree == 1 ? state.P0(i, j, 0) : 0.0;
        double p0y = state.degree == 1 ? state.P0(i, j, 1) : 0.0;
        rep.field_rows.push_back({x[0], x[1], state.M0(i, j), state.phi(i, j), p0x, p0y});
      }
  }

  add_verdict(rep, "mass_conservation", rel_diff(closure_mass(state), mass0), 1e-12);
  if (wants(s, "hamiltonian_drift")) {
    double dx = state.grid().delta(0);
    add_verdict(rep, "hamiltonian_drift", rel_diff(collective_hamiltonian(state), h0), 10.0 * (dx + dt));
  }
  return rep;
}

// ------------------------------------------------------------- radhydro2t --

TwoTempState radhydro_initial(const Scenario &s) {
  SpatialGrid grid = s.spatial_grid();
  ScalarField rho = scalar_from_profile(grid, s.initial.at("rho"));
  ScalarField te = scalar_from_profile(grid, s.initial.at("T_e"));
  ScalarField tr = scalar_from_profile(grid, s.initial.at("T_r"));
  const Profile &pu = s.initial.at("velocity");
  VectorField p(grid);
  ScalarField ee(grid), er(grid);
  for (int i = 0; i < grid.cells[0]; ++i)
    for (int j = 0; j < grid.cells[1]; ++j) {
      p(i, j, 0) = rho(i, j) * pu.eval(grid.center(i, j), grid);
      ee(i, j) = rho(i, j) * s.eos.c_v * te(i, j);
      double t4 = std::pow(tr(i, j), 4);
      er(i, j) = s.eos.a * t4;
    }
  return TwoTempState(std::move(rho), std::move(p), std::move(ee), std::move(er));
}

RunReport run_radhydro(const Scenario &s) {
  RunReport rep;
  TwoTempState state = radhydro_initial(s);
  TransportCoefficients coeffs = s.coefficients();
  Step2TOptions opts;
  opts.strang = s.strang;
  opts.implicit_diffusion = s.implicit_diffusion;

  auto pick_dt = [&]() {
    double dt = *s.cfl * advection_cfl_bound(state, s.eos);
    if (!opts.implicit_diffusion) dt = std::min(dt, 0.9 * diffusion_stability_bound(state, s.eos, coeffs));
    return dt;
  };
  double dt = s.dt ? *s.dt : pick_dt();

  SeriesWriter w(rep, {"time", "mass", "momentum_x", "energy", "entropy", "flux_production",
                       "interaction_production", "max_grad_T_e", "max_grad_T_r", "max_temp_gap"});
  auto emit = [&](double t, const Diagnostics2T &d) {
    w.row({t, d.mass, d.momentum[0], d.energy, d.entropy, d.flux_production, d.interaction_production, d.max_grad_T_e,
           d.max_grad_T_r, d.max_temp_gap});
  };

  Diagnostics2T d0 = diagnostics_2t(state, s.eos, coeffs);
  TwoTempState initial = state;
  emit(0.0, d0);
  double t = 0.0;
  long step = 0;
  double entropy_prev = d0.entropy;
  double entropy_min_step = 0.0;
  double production_min = std::min(d0.flux_production, d0.interaction_production);
  Diagnostics2T d = d0;
  while (t < s.t_end - 1e-12 * s.t_end) {
    double h = std::min(dt, s.t_end - t);
    try {
      state = step_2t(state, h, s.eos, coeffs, opts);
    } catch (const Error &e) {
      throw Error(std::string(e.what()) + " [at t = " + format_double(t) + "]");
    }
    t += h;
    ++step;
    d = diagnostics_2t(state, s.eos, coeffs);
    entropy_min_step = std::min(entropy_min_step, d.entropy - entropy_prev);
    entropy_prev = d.entropy;
    production_min = std::min({production_min, d.flux_production, d.interaction_production});
    if (step % s.cadence == 0 || t >= s.t_end - 1e-12 * s.t_end) emit(t, d);
  }

  rep.field_columns = {"x", "y", "rho", "P_x", "P_y", "E_e", "E_r", "T_e", "T_r"};
  {
    auto [te, tr] = temperatures(state, s.eos);
    const SpatialGrid &g = state.grid();
    for (int i = 0; i < g.cells[0]; ++i)
      for (int j = 0; j < g.cells[1]; ++j) {
        Vec2 x = g.center(i, j);
        rep.field_rows.push_back({x[0], x[1], state.rho(i, j), state.P(i, j, 0), state.P(i, j, 1), state.E_e(i, j),
                                  state.E_r(i, j), te(i, j), tr(i, j)});
      }
  }

  add_verdict(rep, "mass_conservation", rel_diff(d.mass, d0.mass), 1e-12);
  add_verdict(rep, "momentum_conservation", std::abs(d.momentum[0] - d0.momentum[0]), 1e-12 * std::max(1.0, d0.mass));
  if (wants(s, "energy_conservation")) add_verdict(rep, "energy_conservation", rel_diff(d.energy, d0.energy), 1e-8);
  if (wants(s, "entropy_monotone"))
    add_verdict(rep, "entropy_monotone", std::max(0.0, -entropy_min_step), 1e-12 * std::max(1.0, std::abs(d.entropy)));
  if (wants(s, "production_nonnegative")) add_verdict(rep, "production_nonnegative", std::max(0.0, -production_min), 0.0);
  if (wants(s, "equilibrium_fixed_point")) {
    double diff = 0.0;
    for (std::size_t m = 0; m < state.rho.v.size(); ++m) diff = std::max(diff, std::abs(state.rho.v[m] - initial.rho.v[m]));
    for (std::size_t m = 0; m < state.P.v.size(); ++m) diff = std::max(diff, std::abs(state.P.v[m] - initial.P.v[m]));
    for (std::size_t m = 0; m < state.E_e.v.size(); ++m)
      diff = std::max(diff, std::abs(state.E_e.v[m] - initial.E_e.v[m]));
    for (std::size_t m = 0; m < state.E_r.v.size(); ++m)
      diff = std::max(diff, std::abs(state.E_r.v[m] - initial.E_r.v[m]));
    add_verdict(rep, "equilibrium_fixed_point", diff, 0.0);
  }
  return rep;
}

// ---------------------------------------------------- compare closure/kin --

RunReport run_compare(const Scenario &s) {
  RunReport rep;
  if (s.hamiltonian_kind != "nonrelativistic")
    throw Error("run: compare_kinetic_closure uses the nonrelativistic Hamiltonian");
  PhaseGrid pgrid = s.phase_grid();
  SpatialGrid grid = pgrid.space;
  SeparableHamiltonian ham = s.hamiltonian();

  ScalarField m0 = scalar_from_profile(grid, s.initial.at("M0"));
  const Profile &pu = s.initial.at("velocity");
  VectorField mom(grid);
  for (int i = 0; i < grid.cells[0]; ++i)
    for (int j = 0; j < grid.cells[1]; ++j) mom(i, j, 0) = s.mass * pu.eval(grid.center(i, j), grid);
  ScalarField phi = init_phi_from_momentum(mom);
  ClosureState cstate(m0, phi, ham);

  // Gamma_0 image as grid data: the indicator of the p cell containing
  // -grad phi, scaled by 1/dp.
  DistributionField g(pgrid);
  for (int i = 0; i < grid.cells[0]; ++i)
    for (int j = 0; j < grid.cells[1]; ++j) {
      Vec2 p0 = cstate.grad_phi(i, j);
      p0 = {-p0[0], -p0[1]};
      int k = int((p0[0] - pgrid.p_extent[0].lo) / pgrid.dp(0));
      int l = pgrid.dim() == 2 ? int((p0[1] - pgrid.p_extent[1].lo) / pgrid.dp(1)) : 0;
      if (k < 0 || k >= pgrid.p_cells[0] || l < 0 || l >= pgrid.p_cells[1])
        throw Error("run: cold-beam momentum leaves the p grid");
      g(i, j, k, l) = m0(i, j) / pgrid.p_volume();
    }

  double dt = s.dt ? *s.dt : *s.cfl * std::min(transport_cfl_bound(pgrid, ham), closure_cfl_bound(cstate));

  // L1 norms of both moment trajectories and their relative gaps.
  auto gaps = [&]() {
    SymTensorField mk0 = kinetic_moment(g, ham, 0);
    SymTensorField mk1 = kinetic_moment(g, ham, 1);
    VectorField mc1 = m1_from_state0(cstate);
    double g0 = 0.0, n0k = 0.0, n0 = 0.0, g1 = 0.0, n1k = 0.0, n1 = 0.0;
    for (int i = 0; i < grid.cells[0]; ++i)
      for (int j = 0; j < grid.cells[1]; ++j) {
        g0 += std::abs(mk0.comp(i, j, 0) - cstate.M0(i, j));
        n0k += std::abs(mk0.comp(i, j, 0));
        n0 += std::abs(cstate.M0(i, j));
        for (int c = 0; c < grid.dim; ++c) {
          g1 += std::abs(mk1.comp(i, j, c) - mc1(i, j, c));
          n1k += std::abs(mk1.comp(i, j, c));
          n1 += std::abs(mc1(i, j, c));
        }
      }
    double vol = grid.cell_volume();
    return std::array<double, 6>{g0 / std::max(n0, 1e-300), g1 / std::max(n1, 1e-300),
                                 n0k * vol, n0 * vol, n1k * vol, n1 * vol};
  };

  SeriesWriter w(rep, {"time", "m0_gap_rel", "m1_gap_rel", "m0_l1_kinetic", "m0_l1_closure", "m1_l1_kinetic",
                       "m1_l1_closure", "mass_kinetic", "mass_closure"});
  auto emit = [&](double t) {
    auto gp = gaps();
    w.row({t, gp[0], gp[1], gp[2], gp[3], gp[4], gp[5], total_mass(g), closure_mass(cstate)});
  };

  emit(0.0);
  double t = 0.0;
  long step = 0;
  while (t < s.t_end - 1e-12 * s.t_end) {
    double h = std::min(dt, s.t_end - t);
    g = step_transport(g, ham, h, s.scheme);
    cstate = step_closure(cstate, h, s.scheme);
    t += h;
    ++step;
    if (step % s.cadence == 0 || t >= s.t_end - 1e-12 * s.t_end) emit(t);
  }

  {
    rep.field_columns = {"x", "y", "M0_kinetic", "M0_closure", "M1_kinetic", "M1_closure"};
    SymTensorField mk0 = kinetic_moment(g, ham, 0);
    SymTensorField mk1 = kinetic_moment(g, ham, 1);
    VectorField mc1 = m1_from_state0(cstate);
    for (int i = 0; i < grid.cells[0]; ++i)
      for (int j = 0; j < grid.cells[1]; ++j) {
        Vec2 x = grid.center(i, j);
        rep.field_rows.push_back({x[0], x[1], mk0.comp(i, j, 0), cstate.M0(i, j), mk1.comp(i, j, 0),
                                  mc1(i, j, 0)});
      }
  }

  auto gp = gaps();
  rep.metrics.emplace_back("m0_gap_rel", gp[0]);
  rep.metrics.emplace_back("m1_gap_rel", gp[1]);
  rep.metrics.emplace_back("h", grid.delta(0));
  if (wants(s, "cold_beam_gap")) {
    add_verdict(rep, "cold_beam_m0_gap", gp[0], 0.05);
    add_verdict(rep, "cold_beam_m1_gap", gp[1], 0.05);
  }
  return rep;
}

// ----------------------------------------------------------------- output --

void write_artifacts(const Scenario &s, const RunReport &rep, const fs::path &dir) {
  fs::create_directories(dir);

  {
    std::ofstream out(dir / "diagnostics.csv");
    for (std::size_t c = 0; c < rep.columns.size(); ++c) out << (c ? "," : "") << rep.columns[c];
    out << "\n";
    for (const auto &row : rep.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
      out << "\n";
    }
  }
  if (!rep.field_columns.empty()) {
    std::ofstream out(dir / "fields_final.csv");
    for (std::size_t c = 0; c < rep.field_columns.size(); ++c) out << (c ? "," : "") << rep.field_columns[c];
    out << "\n";
    for (const auto &row : rep.field_rows) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
      out << "\n";
    }
  }
  {
    std::ofstream out(dir / "verdicts.csv");
    out << "name,measured,tolerance,pass\n";
    for (const auto &v : rep.verdicts)
      out << v.name << "," << format_double(v.measured) << "," << format_double(v.tolerance) << ","
          << (v.pass ? "1" : "0") << "\n";
  }
  {
    json meta;
    meta["kind"] = scenario_kind_name(s.kind);
    meta["resolution"] = s.x_cells[0];
    meta["t_end"] = s.t_end;
    for (const auto &[k, v] : rep.metrics) meta[k] = v;
    std::ofstream out(dir / "meta.json");
    out << meta.dump(2) << "\n";
  }
  {
    std::ofstream out(dir / "report.txt");
    out << "scenario: " << scenario_kind_name(s.kind) << "\n";
    for (const auto &wmsg : rep.warnings) out << "warning: " << wmsg << "\n";
    out << "\nverdicts:\n";
    for (const auto &v : rep.verdicts)
      out << "  " << (v.pass ? "PASS" : "FAIL") << "  " << v.name << "  measured=" << format_double(v.measured)
          << "  tolerance=" << format_double(v.tolerance) << "\n";
    if (rep.verdicts.empty()) out << "  (none requested)\n";
  }
}

}  // namespace

RunReport run(const Scenario &scenario) {
  switch (scenario.kind) {
    case ScenarioKind::Kinetic: return run_kinetic(scenario);
    case ScenarioKind::Closure0:
    case ScenarioKind::Closure1: return run_closure(scenario);
    case ScenarioKind::RadHydro2T: return run_radhydro(scenario);
    case ScenarioKind::CompareKineticClosure: return run_compare(scenario);
  }
  throw Error("run: unknown scenario kind");
}

RunReport run_and_write(const Scenario &scenario, const std::string &outdir_override) {
  std::string dir = scenario.directory;
  if (const char *env = std::getenv("PHASEKIN_OUT")) dir = env;
  if (!outdir_override.empty()) dir = outdir_override;
  RunReport rep = run(scenario);
  write_artifacts(scenario, rep, dir);
  return rep;
}

namespace {

struct LoadedRun {
  std::string name;
  std::vector<Verdict> verdicts;
  json meta;
};

LoadedRun load_run(const fs::path &dir) {
  LoadedRun r;
  r.name = dir.filename().string();
  std::ifstream v(dir / "verdicts.csv");
  if (!v) throw Error("report: missing verdicts.csv in '" + dir.string() + "'");
  std::string line;
  std::getline(v, line);  // header
  while (std::getline(v, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    Verdict vd;
    std::string tok;
    std::getline(ss, vd.name, ',');
    std::getline(ss, tok, ',');
    vd.measured = std::strtod(tok.c_str(), nullptr);
    std::getline(ss, tok, ',');
    vd.tolerance = std::strtod(tok.c_str(), nullptr);
    std::getline(ss, tok, ',');
    vd.pass = tok == "1";
    r.verdicts.push_back(vd);
  }
  std::ifstream m(dir / "meta.json");
  if (m) m >> r.meta;
  return r;
}

void print_run(std::ostringstream &os, const LoadedRun &r) {
  os << "run " << r.name << ":\n";
  if (r.verdicts.empty()) os << "  (no verdicts)\n";
  for (const auto &v : r.verdicts)
    os << "  " << (v.pass ? "PASS" : "FAIL") << "  " << v.name << "  measured=" << format_double(v.measured)
       << "  tolerance=" << format_double(v.tolerance) << "\n";
}

}  // namespace

std::string report(const std::string &run_dir) {
  fs::path dir(run_dir);
  if (!fs::exists(dir)) throw Error("report: no such directory '" + run_dir + "'");

  std::ostringstream os;
  if (fs::exists(dir / "verdicts.csv")) {
    print_run(os, load_run(dir));
    return os.str();
  }

  std::vector<LoadedRun> runs;
  std::vector<fs::path> subdirs;
  for (const auto &e : fs::directory_iterator(dir))
    if (e.is_directory() && fs::exists(e.path() / "verdicts.csv")) subdirs.push_back(e.path());
  std::sort(subdirs.begin(), subdirs.end());
  for (const auto &p : subdirs) runs.push_back(load_run(p));
  if (runs.empty()) throw Error("report: no runs found in '" + run_dir + "'");

  for (const auto &r : runs) print_run(os, r);

  // Observed order from runs carrying an error metric and a mesh width.
  for (const char *metric : {"l1_error", "m0_gap_rel", "m1_gap_rel"}) {
    std::vector<std::pair<double, double>> pts;  // (log h, log e)
    for (const auto &r : runs)
      if (r.meta.contains(metric) && r.meta.contains("h")) {
        double e = r.meta[metric].get<double>(), h = r.meta["h"].get<double>();
        if (e > 0.0 && h > 0.0) pts.emplace_back(std::log(h), std::log(e));
      }
    if (pts.size() >= 2) {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (auto [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
      }
      double n = double(pts.size());
      double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
      os << "observed order (" << metric << ", " << pts.size() << " runs): " << format_double(slope) << "\n";
    }
  }
  return os.str();
}

}  // namespace phasekin
