#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "phasekin/closures.hpp"
#include "phasekin/collisions.hpp"
#include "phasekin/hamiltonian.hpp"
#include "phasekin/radhydro2t.hpp"

namespace phasekin {

struct ScenarioValidationError : Error {
  std::vector<std::string> errors;
  explicit ScenarioValidationError(std::vector<std::string> errs);
};

enum class ScenarioKind { Kinetic, Closure0, Closure1, RadHydro2T, CompareKineticClosure };

// Named profile with parameters; evaluated on cell centers.
struct Profile {
  std::string name = "uniform";
  std::map<std::string, double> params;

  double eval(const Vec2 &x, const SpatialGrid &grid) const;
  double param(const std::string &key, double fallback) const;
};

struct Scenario {
  int schema_version = 1;
  ScenarioKind kind = ScenarioKind::Kinetic;

  int dim = 1;
  std::array<int, 2> x_cells{4, 1};
  std::array<Interval, 2> x_extent{Interval{0, 1}, Interval{0, 1}};
  std::array<int, 2> p_cells{4, 1};
  std::array<Interval, 2> p_extent{Interval{-1, 1}, Interval{0, 1}};
  bool has_p_grid = false;

  // Hamiltonian spec.
  std::string hamiltonian_kind = "radiation";  // or "nonrelativistic"
  double c_light = 1.0;
  double mass = 1.0;
  Profile potential;  // zero | sine | quadratic

  // Initial condition profiles, keyed by field name (module-specific).
  std::map<std::string, Profile> initial;

  // Physics. Collisions are either isotropic with sigma(x) given by a
  // profile, or explicit symmetric per-shell matrices (uniform in x; shells
  // are indexed in first-encounter order over row-major p cells).
  std::optional<Profile> isotropic_sigma;
  std::map<int, std::vector<std::vector<double>>> shell_matrices;
  EquationOfState eos;
  double coeff_k0 = 0.0, coeff_alpha = 0.0;
  double coeff_d0 = 0.0, coeff_beta = 0.0;
  double coeff_s0 = 0.0;
  bool strang = true;
  bool implicit_diffusion = false;

  // Time control: exactly one of dt, cfl.
  double t_end = 1.0;
  std::optional<double> dt;
  std::optional<double> cfl;
  TimeScheme scheme = TimeScheme::RK2;

  // Output.
  int cadence = 10;
  std::string directory = "out";

  std::vector<std::string> checks;

  SpatialGrid spatial_grid() const;
  PhaseGrid phase_grid() const;
  SeparableHamiltonian hamiltonian() const;
  TransportCoefficients coefficients() const;
};

// Parses and validates; throws ScenarioValidationError carrying every
// validation error found, not just the first.
Scenario parse_scenario(const std::string &path);
Scenario parse_scenario_text(const std::string &text);

// All validation errors for a file; empty means valid.
std::vector<std::string> validate_scenario_file(const std::string &path);

std::string scenario_kind_name(ScenarioKind k);

}  // namespace phasekin
