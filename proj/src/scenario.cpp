#include "phasekin/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace phasekin {

using nlohmann::json;

namespace {
std::string join_errors(const std::vector<std::string> &errs) {
  std::ostringstream os;
  os << "scenario validation failed:";
  for (const auto &e : errs) os << "\n  - " << e;
  return os.str();
}

const double kTwoPi = 6.283185307179586476925286766559;
}  // namespace

ScenarioValidationError::ScenarioValidationError(std::vector<std::string> errs)
    : Error(join_errors(errs)), errors(std::move(errs)) {}

double Profile::param(const std::string &key, double fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

double Profile::eval(const Vec2 &x, const SpatialGrid &grid) const {
  auto phase = [&](int d) {
    double len = grid.extent[d].length();
    return kTwoPi * param("wavenumber", 1.0) * (x[d] - grid.extent[d].lo) / len;
  };
  int axis = int(param("axis", 0.0));
  if (name == "uniform") return param("value", param("base", 0.0));
  if (name == "sine") return param("base", 0.0) + param("amplitude", 1.0) * std::sin(phase(axis));
  if (name == "cosine") return param("base", 0.0) + param("amplitude", 1.0) * std::cos(phase(axis));
  if (name == "gaussian") {
    double w = param("width", 0.1);
    double r2 = 0.0;
    for (int d = 0; d < grid.dim; ++d) {
      double c = param(d == 0 ? "center" : "center_y", 0.5 * (grid.extent[d].lo + grid.extent[d].hi));
      r2 += (x[d] - c) * (x[d] - c);
    }
    return param("base", 0.0) + param("amplitude", 1.0) * std::exp(-r2 / (w * w));
  }
  if (name == "step") {
    double edge = param("edge", 0.5 * (grid.extent[axis].lo + grid.extent[axis].hi));
    return x[axis] < edge ? param("left", 1.0) : param("right", 0.0);
  }
  if (name == "bump") {
    // Compactly supported polynomial bump along one axis.
    double c = param("center", 0.5 * (grid.extent[axis].lo + grid.extent[axis].hi));
    double w = param("width", 0.25 * grid.extent[axis].length());
    double t = (x[axis] - c) / w;
    double b = std::max(0.0, 1.0 - t * t);
    return param("amplitude", 1.0) * b * b;
  }
  if (name == "indicator_positive") return x[axis] > 0.0 ? param("amplitude", 1.0) : 0.0;
  if (name == "quadratic") return param("amplitude", 1.0) * (x[0] * x[0] + x[1] * x[1]);
  if (name == "linear") return param("slope", 1.0) * x[axis] + param("offset", 0.0);
  if (name == "zero") return 0.0;
  throw Error("Profile: unknown profile '" + name + "'");
}

SpatialGrid Scenario::spatial_grid() const { return SpatialGrid(dim, x_cells, x_extent); }

PhaseGrid Scenario::phase_grid() const { return PhaseGrid(spatial_grid(), p_cells, p_extent); }

SeparableHamiltonian Scenario::hamiltonian() const {
  if (hamiltonian_kind == "radiation") return SeparableHamiltonian::radiation(c_light);
  SpatialGrid g = spatial_grid();
  Profile pot = potential;
  if (pot.name == "zero") return SeparableHamiltonian::nonrelativistic(mass);
  if (pot.name == "sine") {
    double amp = pot.param("amplitude", 1.0);
    double k = pot.param("wavenumber", 1.0);
    double lo = g.extent[0].lo, len = g.extent[0].length();
    double freq = kTwoPi * k / len;
    return SeparableHamiltonian::nonrelativistic(
        mass, [amp, freq, lo](const Vec2 &x) { return amp * std::sin(freq * (x[0] - lo)); },
        [amp, freq, lo](const Vec2 &x) { return Vec2{amp * freq * std::cos(freq * (x[0] - lo)), 0.0}; });
  }
  if (pot.name == "quadratic") {
    double amp = pot.param("amplitude", 1.0);
    return SeparableHamiltonian::nonrelativistic(
        mass, [amp](const Vec2 &x) { return amp * dot(x, x); },
        [amp](const Vec2 &x) { return Vec2{2.0 * amp * x[0], 2.0 * amp * x[1]}; });
  }
  throw Error("Scenario: unknown potential profile '" + pot.name + "'");
}

TransportCoefficients Scenario::coefficients() const {
  return TransportCoefficients::power_law(coeff_k0, coeff_alpha, coeff_d0, coeff_beta, coeff_s0, c_light);
}

std::string scenario_kind_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Kinetic: return "kinetic";
    case ScenarioKind::Closure0: return "closure0";
    case ScenarioKind::Closure1: return "closure1";
    case ScenarioKind::RadHydro2T: return "radhydro2t";
    case ScenarioKind::CompareKineticClosure: return "compare_kinetic_closure";
  }
  return "?";
}

namespace {

Profile parse_profile(const json &j, std::vector<std::string> &errs, const std::string &where) {
  Profile p;
  if (!j.is_object()) {
    errs.push_back(where + ": profile must be an object with a 'profile' name");
    return p;
  }
  if (!j.contains("profile") || !j["profile"].is_string()) {
    errs.push_back(where + ": missing 'profile' name");
    return p;
  }
  p.name = j["profile"].get<std::string>();
  static const std::vector<std::string> known{"uniform", "sine",   "cosine", "gaussian",           "step",
                                              "bump",    "linear", "zero",   "indicator_positive", "quadratic"};
  bool ok = false;
  for (const auto &k : known) ok = ok || (k == p.name);
  if (!ok) errs.push_back(where + ": unknown profile name '" + p.name + "'");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "profile") continue;
    if (!it.value().is_number()) {
      errs.push_back(where + ": parameter '" + it.key() + "' must be a number");
      continue;
    }
    p.params[it.key()] = it.value().get<double>();
  }
  return p;
}

void parse_axes(const json &j, const std::string &cells_key, const std::string &extent_key, int dim,
                std::array<int, 2> &cells, std::array<Interval, 2> &extent, std::vector<std::string> &errs) {
  if (j.contains(cells_key)) {
    const json &c = j[cells_key];
    if (!c.is_array() || int(c.size()) != dim) {
      errs.push_back("grid." + cells_key + ": need " + std::to_string(dim) + " entries");
    } else {
      for (int d = 0; d < dim; ++d) {
        int n = c[d].get<int>();
        if (n < 4)
          errs.push_back("grid." + cells_key + "[" + std::to_string(d) + "]: cell count " + std::to_string(n) +
                         " violates >= 4");
        cells[d] = n;
      }
    }
  } else {
    errs.push_back("grid." + cells_key + ": missing");
  }
  if (j.contains(extent_key)) {
    const json &e = j[extent_key];
    if (!e.is_array() || int(e.size()) != dim) {
      errs.push_back("grid." + extent_key + ": need " + std::to_string(dim) + " [lo, hi] pairs");
    } else {
      for (int d = 0; d < dim; ++d) {
        if (!e[d].is_array() || e[d].size() != 2) {
          errs.push_back("grid." + extent_key + "[" + std::to_string(d) + "]: need [lo, hi]");
          continue;
        }
        double lo = e[d][0].get<double>(), hi = e[d][1].get<double>();
        if (!(hi > lo))
          errs.push_back("grid." + extent_key + "[" + std::to_string(d) + "]: extent must have positive length");
        extent[d] = Interval{lo, hi};
      }
    }
  } else {
    errs.push_back("grid." + extent_key + ": missing");
  }
}

Scenario parse_json(const json &j) {
  std::vector<std::string> errs;
  Scenario s;

  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
    errs.push_back("schema_version: missing integer field");
  else
    s.schema_version = j["schema_version"].get<int>();
  if (s.schema_version != 1) errs.push_back("schema_version: unsupported version");

  std::string kind = j.value("kind", "");
  if (kind == "kinetic")
    s.kind = ScenarioKind::Kinetic;
  else if (kind == "closure0")
    s.kind = ScenarioKind::Closure0;
  else if (kind == "closure1")
    s.kind = ScenarioKind::Closure1;
  else if (kind == "radhydro2t")
    s.kind = ScenarioKind::RadHydro2T;
  else if (kind == "compare_kinetic_closure")
    s.kind = ScenarioKind::CompareKineticClosure;
  else
    errs.push_back("kind: must be one of kinetic, closure0, closure1, radhydro2t, compare_kinetic_closure");

  bool needs_p =
      s.kind == ScenarioKind::Kinetic || s.kind == ScenarioKind::CompareKineticClosure;

  if (!j.contains("grid") || !j["grid"].is_object()) {
    errs.push_back("grid: missing object");
  } else {
    const json &g = j["grid"];
    s.dim = g.value("dim", 1);
    if (s.dim < 1 || s.dim > 2) {
      errs.push_back("grid.dim: must be 1 or 2");
      s.dim = 1;
    }
    parse_axes(g, "x_cells", "x_extent", s.dim, s.x_cells, s.x_extent, errs);
    if (g.contains("p_cells") || g.contains("p_extent")) {
      s.has_p_grid = true;
      parse_axes(g, "p_cells", "p_extent", s.dim, s.p_cells, s.p_extent, errs);
    } else if (needs_p) {
      errs.push_back("grid: kinetic scenarios need p_cells and p_extent");
    }
  }

  if (!j.contains("hamiltonian") || !j["hamiltonian"].is_object()) {
    if (s.kind != ScenarioKind::RadHydro2T) errs.push_back("hamiltonian: missing object");
  } else {
    const json &h = j["hamiltonian"];
    s.hamiltonian_kind = h.value("kind", "");
    if (s.hamiltonian_kind == "radiation") {
      s.c_light = h.value("c", 1.0);
      if (!(s.c_light > 0.0)) errs.push_back("hamiltonian.c: must be positive");
    } else if (s.hamiltonian_kind == "nonrelativistic") {
      s.mass = h.value("mass", 1.0);
      if (!(s.mass > 0.0)) errs.push_back("hamiltonian.mass: must be positive");
      if (h.contains("potential"))
        s.potential = parse_profile(h["potential"], errs, "hamiltonian.potential");
      else
        s.potential.name = "zero";
    } else {
      errs.push_back("hamiltonian.kind: must be radiation or nonrelativistic");
    }
  }

  if (j.contains("initial")) {
    if (!j["initial"].is_object()) {
      errs.push_back("initial: must be an object of field profiles");
    } else {
      for (auto it = j["initial"].begin(); it != j["initial"].end(); ++it)
        s.initial[it.key()] = parse_profile(it.value(), errs, "initial." + it.key());
    }
  } else {
    errs.push_back("initial: missing");
  }

  if (j.contains("physics") && j["physics"].is_object()) {
    const json &ph = j["physics"];
    if (ph.contains("collisions") && ph["collisions"].is_object()) {
      const json &co = ph["collisions"];
      if (co.contains("isotropic_sigma")) {
        const json &sg = co["isotropic_sigma"];
        if (sg.is_number()) {
          double v = sg.get<double>();
          if (v < 0.0) errs.push_back("physics.collisions.isotropic_sigma: must be nonnegative");
          Profile p;
          p.name = "uniform";
          p.params["value"] = v;
          s.isotropic_sigma = p;
        } else {
          s.isotropic_sigma = parse_profile(sg, errs, "physics.collisions.isotropic_sigma");
        }
      }
      if (co.contains("shell_matrices")) {
        if (!co["shell_matrices"].is_object()) {
          errs.push_back("physics.collisions.shell_matrices: must map shell index to a square matrix");
        } else {
          for (auto it = co["shell_matrices"].begin(); it != co["shell_matrices"].end(); ++it) {
            int shell = -1;
            try {
              shell = std::stoi(it.key());
            } catch (...) {
              errs.push_back("physics.collisions.shell_matrices: key '" + it.key() + "' is not a shell index");
              continue;
            }
            std::vector<std::vector<double>> mat;
            const json &rows = it.value();
            bool ok = rows.is_array();
            for (std::size_t r = 0; ok && r < rows.size(); ++r) {
              ok = rows[r].is_array() && rows[r].size() == rows.size();
              if (!ok) break;
              std::vector<double> row;
              for (const auto &x : rows[r]) {
                double v = x.get<double>();
                if (v < 0.0) errs.push_back("physics.collisions.shell_matrices: entries must be nonnegative");
                row.push_back(v);
              }
              mat.push_back(row);
            }
            if (!ok) {
              errs.push_back("physics.collisions.shell_matrices[" + it.key() + "]: must be a square matrix");
              continue;
            }
            for (std::size_t r = 0; r < mat.size(); ++r)
              for (std::size_t c = 0; c < r; ++c)
                if (mat[r][c] != mat[c][r])
                  errs.push_back("physics.collisions.shell_matrices[" + it.key() + "]: matrix must be symmetric");
            s.shell_matrices[shell] = std::move(mat);
          }
        }
      }
      if (s.isotropic_sigma && !s.shell_matrices.empty())
        errs.push_back("physics.collisions: give either isotropic_sigma or shell_matrices, not both");
    }
    if (ph.contains("eos") && ph["eos"].is_object()) {
      const json &e = ph["eos"];
      double gamma = e.value("gamma", 5.0 / 3.0);
      double c_v = e.value("c_v", 1.0);
      double a = e.value("a", 1.0);
      if (!(gamma > 1.0)) errs.push_back("physics.eos.gamma: must be > 1");
      if (!(c_v > 0.0)) errs.push_back("physics.eos.c_v: must be positive");
      if (!(a > 0.0)) errs.push_back("physics.eos.a: must be positive");
      if (gamma > 1.0 && c_v > 0.0 && a > 0.0) s.eos = EquationOfState(gamma, c_v, a);
      s.c_light = e.value("c", s.c_light);
    }
    if (ph.contains("coefficients") && ph["coefficients"].is_object()) {
      const json &c = ph["coefficients"];
      if (c.contains("K_e")) {
        s.coeff_k0 = c["K_e"].value("k0", 0.0);
        s.coeff_alpha = c["K_e"].value("alpha", 0.0);
        if (s.coeff_k0 < 0.0) errs.push_back("physics.coefficients.K_e.k0: must be nonnegative");
      }
      if (c.contains("D")) {
        s.coeff_d0 = c["D"].value("d0", 0.0);
        s.coeff_beta = c["D"].value("beta", 0.0);
        if (s.coeff_d0 < 0.0) errs.push_back("physics.coefficients.D.d0: must be nonnegative");
      }
      if (c.contains("sigma_P")) {
        s.coeff_s0 = c["sigma_P"].value("s0", 0.0);
        if (s.coeff_s0 < 0.0) errs.push_back("physics.coefficients.sigma_P.s0: must be nonnegative");
      }
    }
    s.strang = ph.value("splitting", "strang") == "strang";
    if (ph.contains("splitting")) {
      std::string sp = ph["splitting"].get<std::string>();
      if (sp != "strang" && sp != "first_order") errs.push_back("physics.splitting: must be strang or first_order");
    }
    s.implicit_diffusion = ph.value("implicit_diffusion", false);
  }

  if (!j.contains("time") || !j["time"].is_object()) {
    errs.push_back("time: missing object");
  } else {
    const json &t = j["time"];
    s.t_end = t.value("t_end", 1.0);
    if (!(s.t_end > 0.0)) errs.push_back("time.t_end: must be positive");
    bool has_dt = t.contains("dt"), has_cfl = t.contains("cfl");
    if (has_dt && has_cfl) errs.push_back("time: give exactly one of dt and cfl, not both");
    if (has_dt) {
      s.dt = t["dt"].get<double>();
      if (!(*s.dt > 0.0)) errs.push_back("time.dt: must be positive");
    }
    if (has_cfl) {
      s.cfl = t["cfl"].get<double>();
      if (!(*s.cfl > 0.0) || *s.cfl > 0.9) errs.push_back("time.cfl: must be in (0, 0.9]");
    }
    if (!has_dt && !has_cfl) s.cfl = 0.5;  // documented default
  }

  std::string scheme = j.value("scheme", "rk2");
  if (scheme == "euler")
    s.scheme = TimeScheme::Euler;
  else if (scheme == "rk2")
    s.scheme = TimeScheme::RK2;
  else if (scheme == "rk4")
    s.scheme = TimeScheme::RK4;
  else
    errs.push_back("scheme: must be euler, rk2 or rk4");

  if (j.contains("output") && j["output"].is_object()) {
    s.cadence = j["output"].value("cadence", 10);
    if (s.cadence < 1) errs.push_back("output.cadence: must be >= 1");
    s.directory = j["output"].value("directory", "out");
  }

  if (j.contains("checks")) {
    if (!j["checks"].is_array()) {
      errs.push_back("checks: must be an array of names");
    } else {
      for (const auto &c : j["checks"]) s.checks.push_back(c.get<std::string>());
      // Every requested check must produce a verdict for this kind.
      std::vector<std::string> known;
      switch (s.kind) {
        case ScenarioKind::Kinetic:
          known = {"mass_conservation", "positivity",           "energy_conservation",
                   "entropy_monotone",  "collision_energy_rate", "free_streaming_l1"};
          break;
        case ScenarioKind::Closure0:
        case ScenarioKind::Closure1:
          known = {"mass_conservation", "hamiltonian_drift"};
          break;
        case ScenarioKind::RadHydro2T:
          known = {"mass_conservation", "momentum_conservation",  "energy_conservation",
                   "entropy_monotone",  "production_nonnegative", "equilibrium_fixed_point"};
          break;
        case ScenarioKind::CompareKineticClosure:
          known = {"cold_beam_gap"};
          break;
      }
      for (const auto &c : s.checks) {
        bool ok = false;
        for (const auto &k : known) ok = ok || (k == c);
        if (!ok) errs.push_back("checks: '" + c + "' is not a check for " + scenario_kind_name(s.kind) + " scenarios");
      }
    }
  }

  // Kind-specific required initial fields.
  auto need = [&](const char *key) {
    if (!s.initial.count(key))
      errs.push_back(std::string("initial.") + key + ": required for " + scenario_kind_name(s.kind) + " scenarios");
  };
  if (j.contains("initial") && j["initial"].is_object()) {
    switch (s.kind) {
      case ScenarioKind::Kinetic:
        need("g_x");
        need("g_p");
        break;
      case ScenarioKind::Closure0:
        need("M0");
        need("phi");
        break;
      case ScenarioKind::Closure1:
        need("M0");
        need("phi");
        need("P0");
        break;
      case ScenarioKind::RadHydro2T:
        need("rho");
        need("velocity");
        need("T_e");
        need("T_r");
        break;
      case ScenarioKind::CompareKineticClosure:
        need("M0");
        need("velocity");
        break;
    }
  }

  if (!errs.empty()) throw ScenarioValidationError(std::move(errs));
  return s;
}

}  // namespace

Scenario parse_scenario_text(const std::string &text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ScenarioValidationError({std::string("not parseable: ") + e.what()});
  }
  return parse_json(j);
}

Scenario parse_scenario(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("parse_scenario: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str());
}

std::vector<std::string> validate_scenario_file(const std::string &path) {
  try {
    parse_scenario(path);
    return {};
  } catch (const ScenarioValidationError &e) {
    return e.errors;
  }
}

}  // namespace phasekin
