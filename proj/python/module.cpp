#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "phasekin/closures.hpp"
#include "phasekin/collisions.hpp"
#include "phasekin/moments.hpp"
#include "phasekin/radhydro2t.hpp"
#include "phasekin/runner.hpp"

namespace py = pybind11;
using namespace phasekin;

namespace {

py::array_t<double> to_array(const std::vector<double> &v, std::vector<std::size_t> shape) {
  py::array_t<double> out(shape);
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::vector<double> from_array(const py::array_t<double, py::array::c_style | py::array::forcecast> &a,
                               std::size_t expected) {
  if (std::size_t(a.size()) != expected) throw Error("array size mismatch");
  return std::vector<double>(a.data(), a.data() + a.size());
}

Interval make_interval(std::pair<double, double> p) { return Interval{p.first, p.second}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Phase-space kinetic transport, Hamiltonian moment closures and 2T radiation hydrodynamics";

  py::register_exception<Error>(m, "PhasekinError");

  py::enum_<TimeScheme>(m, "TimeScheme")
      .value("euler", TimeScheme::Euler)
      .value("rk2", TimeScheme::RK2)
      .value("rk4", TimeScheme::RK4);

  py::class_<SpatialGrid>(m, "SpatialGrid")
      .def(py::init([](int dim, std::vector<int> cells, std::vector<std::pair<double, double>> extent) {
             std::array<int, 2> c{cells.at(0), dim == 2 ? cells.at(1) : 1};
             std::array<Interval, 2> e{make_interval(extent.at(0)),
                                       dim == 2 ? make_interval(extent.at(1)) : Interval{0, 1}};
             return SpatialGrid(dim, c, e);
           }),
           py::arg("dim"), py::arg("cells"), py::arg("extent"))
      .def_readonly("dim", &SpatialGrid::dim)
      .def_property_readonly("cells", [](const SpatialGrid &g) { return std::vector<int>{g.cells[0], g.cells[1]}; })
      .def("delta", &SpatialGrid::delta)
      .def("center", py::overload_cast<int, int>(&SpatialGrid::center, py::const_));

  py::class_<PhaseGrid>(m, "PhaseGrid")
      .def(py::init([](const SpatialGrid &space, std::vector<int> p_cells,
                       std::vector<std::pair<double, double>> p_extent) {
             std::array<int, 2> c{p_cells.at(0), space.dim == 2 ? p_cells.at(1) : 1};
             std::array<Interval, 2> e{make_interval(p_extent.at(0)),
                                       space.dim == 2 ? make_interval(p_extent.at(1)) : Interval{0, 1}};
             return PhaseGrid(space, c, e);
           }),
           py::arg("space"), py::arg("p_cells"), py::arg("p_extent"))
      .def_readonly("space", &PhaseGrid::space)
      .def("dp", &PhaseGrid::dp)
      .def("p_center", py::overload_cast<int, int>(&PhaseGrid::p_center, py::const_));

  py::class_<ScalarField>(m, "ScalarField")
      .def(py::init([](const SpatialGrid &g, py::array_t<double> a) {
             ScalarField f(g);
             f.v = from_array(a, g.size());
             return f;
           }),
           py::arg("grid"), py::arg("values"))
      .def_readonly("grid", &ScalarField::grid)
      .def_property_readonly("values", [](const ScalarField &f) {
        return to_array(f.v, {std::size_t(f.grid.cells[0]), std::size_t(f.grid.cells[1])});
      });

  py::class_<VectorField>(m, "VectorField")
      .def(py::init([](const SpatialGrid &g, py::array_t<double> a) {
             VectorField f(g);
             f.v = from_array(a, 2 * g.size());
             return f;
           }),
           py::arg("grid"), py::arg("values"))
      .def_readonly("grid", &VectorField::grid)
      .def_property_readonly("values", [](const VectorField &f) {
        return to_array(f.v, {std::size_t(f.grid.cells[0]), std::size_t(f.grid.cells[1]), 2});
      });

  py::class_<DistributionField>(m, "DistributionField")
      .def(py::init([](const PhaseGrid &g, py::array_t<double> a) {
             DistributionField f(g);
             f.v = from_array(a, g.size());
             return f;
           }),
           py::arg("grid"), py::arg("values"))
      .def_readonly("grid", &DistributionField::grid)
      .def_property_readonly("values", [](const DistributionField &f) {
        const PhaseGrid &g = f.grid;
        return to_array(f.v, {std::size_t(g.space.cells[0]), std::size_t(g.space.cells[1]),
                              std::size_t(g.p_cells[0]), std::size_t(g.p_cells[1])});
      });

  py::class_<SymTensorField>(m, "SymTensorField")
      .def(py::init([](const SpatialGrid &g, int degree, py::array_t<double> a) {
             SymTensorField t(g, degree);
             t.v = from_array(a, t.v.size());
             return t;
           }),
           py::arg("grid"), py::arg("degree"), py::arg("values"))
      .def_readonly("degree", &SymTensorField::degree)
      .def("ncomp", &SymTensorField::ncomp)
      .def_property_readonly("values", [](const SymTensorField &t) {
        return to_array(t.v, {std::size_t(t.grid.cells[0]), std::size_t(t.grid.cells[1]), std::size_t(t.ncomp())});
      });

  py::class_<SeparableHamiltonian>(m, "SeparableHamiltonian")
      .def_static("nonrelativistic", [](double mass) { return SeparableHamiltonian::nonrelativistic(mass); },
                  py::arg("mass"))
      .def_static("radiation", &SeparableHamiltonian::radiation, py::arg("c"))
      .def("__call__", [](const SeparableHamiltonian &h, std::pair<double, double> x, std::pair<double, double> p) {
        return h(Vec2{x.first, x.second}, Vec2{p.first, p.second});
      });

  // Kinetics.
  m.def("poisson_bracket", &poisson_bracket);
  m.def("transport_rhs", &transport_rhs);
  m.def("transport_cfl_bound", &transport_cfl_bound);
  m.def("step_transport", &step_transport, py::arg("g"), py::arg("h"), py::arg("dt"),
        py::arg("scheme") = TimeScheme::RK2);
  m.def("total_mass", &total_mass);
  m.def("total_energy", &total_energy);
  m.def("total_momentum", [](const DistributionField &g) {
    Vec2 p = total_momentum(g);
    return std::make_pair(p[0], p[1]);
  });
  m.def("wave_entropy", &wave_entropy);
  m.def("boltzmann_entropy", &boltzmann_entropy);
  m.def("intensity_from_density", &intensity_from_density);

  // Moments.
  py::class_<Weight>(m, "Weight")
      .def_static("one", &Weight::one)
      .def_static("hamiltonian", &Weight::hamiltonian);
  m.def("kinetic_moment", &kinetic_moment);
  m.def("weighted_moment", &weighted_moment);
  m.def("verify_moment_consistency", &verify_moment_consistency);

  // Collisions.
  py::class_<ScatteringKernel>(m, "ScatteringKernel")
      .def_static("isotropic",
                  [](const PhaseGrid &g, double sigma) {
                    return ScatteringKernel::isotropic(g, [sigma](const Vec2 &) { return sigma; });
                  })
      .def("singleton_shell_count", &ScatteringKernel::singleton_shell_count)
      .def_property_readonly("shell_count", [](const ScatteringKernel &k) { return k.shells.size(); });
  m.def("absorption_from_scattering", &absorption_from_scattering);
  m.def("collision_rhs", &collision_rhs);
  m.def("collision_diagnostics", [](const DistributionField &psi, const ScatteringKernel &k,
                                    const SeparableHamiltonian &h) {
    CollisionDiagnostics d = collision_diagnostics(psi, k, h);
    return std::make_pair(d.energy_rate, d.entropy_rate);
  });

  // Closures.
  py::class_<ClosureState>(m, "ClosureState")
      .def(py::init<ScalarField, ScalarField, SeparableHamiltonian, Vec2>(), py::arg("M0"), py::arg("phi"),
           py::arg("hamiltonian"), py::arg("phi_slope") = Vec2{0.0, 0.0})
      .def(py::init<ScalarField, VectorField, ScalarField, SeparableHamiltonian, Vec2>(), py::arg("M0"),
           py::arg("P0"), py::arg("phi"), py::arg("hamiltonian"), py::arg("phi_slope") = Vec2{0.0, 0.0})
      .def_readonly("degree", &ClosureState::degree)
      .def_readonly("M0", &ClosureState::M0)
      .def_readonly("P0", &ClosureState::P0)
      .def_readonly("phi", &ClosureState::phi);
  py::class_<GammaImageSpec>(m, "GammaImageSpec")
      .def(py::init<int, ScalarField, std::vector<SymTensorField>, ScalarField, SeparableHamiltonian, Vec2>(),
           py::arg("degree"), py::arg("M0"), py::arg("P"), py::arg("phi"), py::arg("hamiltonian"),
           py::arg("phi_slope") = Vec2{0.0, 0.0})
      .def_readonly("degree", &GammaImageSpec::degree);
  m.def("gamma_moment", &gamma_moment);
  m.def("generating_function_gap",
        [](const GammaImageSpec &lo, const GammaImageSpec &hi, std::pair<double, double> s) {
          return generating_function_gap(lo, hi, Vec2{s.first, s.second});
        });
  m.def("moment_evolution_rhs", [](const DistributionField &g, const SeparableHamiltonian &h, const Weight &w,
                                   int k) {
    MomentEvolution ev = moment_evolution_rhs(g, h, w, k);
    return std::make_pair(ev.flux_divergence, ev.source);
  });
  m.def("sym_tensor_product", &sym_tensor_product);
  m.def("hj_rhs", &hj_rhs, py::arg("phi"), py::arg("h"), py::arg("phi_slope") = Vec2{0.0, 0.0});
  m.def("m1_from_state0", &m1_from_state0);
  m.def("m1_from_state1", &m1_from_state1);
  m.def("m2_from_state1", &m2_from_state1);
  m.def("init_phi_from_momentum", &init_phi_from_momentum);
  m.def("closure_cfl_bound", &closure_cfl_bound);
  m.def("step_closure", &step_closure, py::arg("state"), py::arg("dt"), py::arg("scheme") = TimeScheme::RK2);
  m.def("collective_hamiltonian", &collective_hamiltonian);
  m.def("closure_mass", &closure_mass);

  // Two-temperature radiation hydrodynamics.
  py::class_<EquationOfState>(m, "EquationOfState")
      .def(py::init<double, double, double>(), py::arg("gamma"), py::arg("c_v"), py::arg("a"))
      .def_readonly("gamma", &EquationOfState::gamma)
      .def_readonly("c_v", &EquationOfState::c_v)
      .def_readonly("a", &EquationOfState::a);
  py::class_<TransportCoefficients>(m, "TransportCoefficients")
      .def_static("constant", &TransportCoefficients::constant, py::arg("k_e"), py::arg("d"), py::arg("sigma"),
                  py::arg("c") = 1.0)
      .def_static("power_law", &TransportCoefficients::power_law, py::arg("k0"), py::arg("alpha"), py::arg("d0"),
                  py::arg("beta"), py::arg("s0"), py::arg("c") = 1.0);
  py::class_<TwoTempState>(m, "TwoTempState")
      .def(py::init<ScalarField, VectorField, ScalarField, ScalarField>(), py::arg("rho"), py::arg("P"),
           py::arg("E_e"), py::arg("E_r"))
      .def_readonly("rho", &TwoTempState::rho)
      .def_readonly("P", &TwoTempState::P)
      .def_readonly("E_e", &TwoTempState::E_e)
      .def_readonly("E_r", &TwoTempState::E_r);
  py::class_<Step2TOptions>(m, "Step2TOptions")
      .def(py::init<>())
      .def_readwrite("strang", &Step2TOptions::strang)
      .def_readwrite("implicit_diffusion", &Step2TOptions::implicit_diffusion);
  py::class_<Diagnostics2T>(m, "Diagnostics2T")
      .def_readonly("mass", &Diagnostics2T::mass)
      .def_readonly("energy", &Diagnostics2T::energy)
      .def_readonly("entropy", &Diagnostics2T::entropy)
      .def_readonly("flux_production", &Diagnostics2T::flux_production)
      .def_readonly("interaction_production", &Diagnostics2T::interaction_production)
      .def_readonly("max_grad_T_e", &Diagnostics2T::max_grad_T_e)
      .def_readonly("max_grad_T_r", &Diagnostics2T::max_grad_T_r)
      .def_readonly("max_temp_gap", &Diagnostics2T::max_temp_gap);
  m.def("temperatures", &temperatures);
  m.def("pressures", &pressures);
  m.def("advection_rhs", &advection_rhs);
  m.def("flux_rhs", &flux_rhs);
  m.def("interaction_rhs",
        [](const TwoTempState &s, const EquationOfState &e, const TransportCoefficients &c) {
          TwoTempRhs r = interaction_rhs(s, e, c);
          return std::make_pair(r.dE_e, r.dE_r);
        });
  m.def("diagnostics_2t", &diagnostics_2t);
  m.def("step_2t", &step_2t, py::arg("state"), py::arg("dt"), py::arg("eos"), py::arg("coeffs"),
        py::arg("options") = Step2TOptions{});

  // Scenario driver.
  m.def("run_scenario", [](const std::string &path, const std::string &outdir) {
    Scenario s = parse_scenario(path);
    RunReport rep = run_and_write(s, outdir);
    py::dict out;
    out["all_pass"] = rep.all_pass();
    py::list verdicts;
    for (const auto &v : rep.verdicts) {
      py::dict d;
      d["name"] = v.name;
      d["measured"] = v.measured;
      d["tolerance"] = v.tolerance;
      d["pass"] = v.pass;
      verdicts.append(d);
    }
    out["verdicts"] = verdicts;
    return out;
  });
  m.def("validate_scenario", &validate_scenario_file);
}
