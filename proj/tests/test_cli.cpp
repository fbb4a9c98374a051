#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "phasekin/runner.hpp"

using namespace phasekin;
namespace fs = std::filesystem;

namespace {

const char *kKineticScenario = R"json({
  "schema_version": 1,
  "kind": "kinetic",
  "grid": {"dim": 1, "x_cells": [32], "x_extent": [[0.0, 6.283185307179586]],
           "p_cells": [8], "p_extent": [[-1.0, 1.0]]},
  "hamiltonian": {"kind": "radiation", "c": 1.0},
  "initial": {"g_x": {"profile": "sine", "base": 1.0, "amplitude": 0.5},
              "g_p": {"profile": "uniform", "value": 1.0}},
  "time": {"t_end": 0.5},
  "output": {"cadence": 5, "directory": "out"},
  "checks": ["positivity"]
})json";

const char *kEquilibrium2T = R"json({
  "schema_version": 1,
  "kind": "radhydro2t",
  "grid": {"dim": 1, "x_cells": [32], "x_extent": [[0.0, 1.0]]},
  "initial": {"rho": {"profile": "uniform", "value": 1.0},
              "velocity": {"profile": "zero"},
              "T_e": {"profile": "uniform", "value": 1.0},
              "T_r": {"profile": "uniform", "value": 1.0}},
  "physics": {"eos": {"gamma": 1.6666666666666667, "c_v": 1.0, "a": 1.0},
              "coefficients": {"K_e": {"k0": 0.05}, "D": {"d0": 0.05}, "sigma_P": {"s0": 0.5}},
              "splitting": "strang"},
  "time": {"t_end": 0.2, "cfl": 0.4},
  "output": {"cadence": 10, "directory": "out"},
  "checks": ["energy_conservation", "entropy_monotone", "production_nonnegative", "equilibrium_fixed_point"]
})json";

fs::path fresh_dir(const std::string &name) {
  fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_scenario(const fs::path &dir, const std::string &name, const std::string &text) {
  fs::path p = dir / name;
  std::ofstream out(p);
  out << text;
  return p;
}

}  // namespace

TEST_CASE("parse_scenario fills documented defaults") {
  Scenario s = parse_scenario_text(kKineticScenario);
  CHECK(s.kind == ScenarioKind::Kinetic);
  CHECK(s.cfl.has_value());
  CHECK(*s.cfl == 0.5);
  CHECK_FALSE(s.dt.has_value());
  CHECK(s.scheme == TimeScheme::RK2);
  CHECK(s.cadence == 5);
}

TEST_CASE("parse_scenario reports every violation, naming the field") {
  std::string bad = R"json({
    "schema_version": 1,
    "kind": "kinetic",
    "grid": {"dim": 1, "x_cells": [2], "x_extent": [[0.0, 1.0]],
             "p_cells": [8], "p_extent": [[-1.0, 1.0]]},
    "hamiltonian": {"kind": "nonrelativistic", "mass": -1.0},
    "initial": {"g_x": {"profile": "nosuch"}, "g_p": {"profile": "uniform"}},
    "time": {"t_end": 1.0, "dt": 0.1, "cfl": 0.5}
  })json";
  try {
    parse_scenario_text(bad);
    FAIL("expected validation failure");
  } catch (const ScenarioValidationError &e) {
    auto has = [&](const std::string &needle) {
      for (const auto &msg : e.errors)
        if (msg.find(needle) != std::string::npos) return true;
      return false;
    };
    CHECK(e.errors.size() >= 4);
    CHECK(has("hamiltonian.mass"));
    CHECK(has("x_cells"));
    CHECK(has("nosuch"));
    CHECK(has("exactly one of dt and cfl"));
  }
}

TEST_CASE("unparseable text is a validation error") {
  CHECK_THROWS_AS(parse_scenario_text("{ not json"), ScenarioValidationError);
}

TEST_CASE("validate_scenario_file lists errors and accepts valid input") {
  fs::path dir = fresh_dir("phasekin_cli_validate");
  fs::path good = write_scenario(dir, "good.json", kKineticScenario);
  CHECK(validate_scenario_file(good.string()).empty());
  fs::path bad = write_scenario(dir, "bad.json", "{\"schema_version\": 1}");
  CHECK_FALSE(validate_scenario_file(bad.string()).empty());
}

TEST_CASE("kinetic run writes artifacts and reruns bitwise identically") {
  fs::path dir = fresh_dir("phasekin_cli_determinism");
  Scenario s = parse_scenario_text(kKineticScenario);

  RunReport r1 = run_and_write(s, (dir / "a").string());
  RunReport r2 = run_and_write(s, (dir / "b").string());
  CHECK(r1.all_pass());
  CHECK(slurp(dir / "a" / "diagnostics.csv") == slurp(dir / "b" / "diagnostics.csv"));
  CHECK(slurp(dir / "a" / "verdicts.csv") == slurp(dir / "b" / "verdicts.csv"));
  CHECK(slurp(dir / "a" / "diagnostics.csv").size() > 0);

  // CSV has a header row and full-precision values.
  std::string head = slurp(dir / "a" / "diagnostics.csv");
  CHECK(head.rfind("time,", 0) == 0);
}

TEST_CASE("equilibrium 2T scenario passes every requested verdict") {
  fs::path dir = fresh_dir("phasekin_cli_2t");
  Scenario s = parse_scenario_text(kEquilibrium2T);
  RunReport rep = run_and_write(s, (dir / "eq").string());
  CHECK(rep.all_pass());
  bool found = false;
  for (const auto &v : rep.verdicts)
    if (v.name == "equilibrium_fixed_point") {
      found = true;
      CHECK(v.measured == 0.0);
    }
  CHECK(found);
  // Production columns are identically zero in equilibrium.
  for (const auto &row : rep.rows) {
    CHECK(row[5] <= 1e-12);
    CHECK(row[6] <= 1e-12);
  }
}

TEST_CASE("report prints verdicts and fits the observed order of a family") {
  fs::path dir = fresh_dir("phasekin_cli_family");
  for (int nx : {64, 128, 256}) {
    std::ostringstream os;
    os << R"json({
      "schema_version": 1,
      "kind": "kinetic",
      "grid": {"dim": 1, "x_cells": [)json"
       << nx << R"json(], "x_extent": [[0.0, 6.283185307179586]],
               "p_cells": [8], "p_extent": [[-1.0, 1.0]]},
      "hamiltonian": {"kind": "radiation", "c": 1.0},
      "initial": {"g_x": {"profile": "sine", "base": 1.0, "amplitude": 0.5},
                  "g_p": {"profile": "uniform", "value": 1.0}},
      "time": {"t_end": 0.5, "cfl": 0.45},
      "checks": ["free_streaming_l1"]
    })json";
    Scenario s = parse_scenario_text(os.str());
    run_and_write(s, (dir / ("n" + std::to_string(nx))).string());
  }
  std::string rpt = report(dir.string());
  CHECK(rpt.find("observed order (l1_error") != std::string::npos);

  // The fitted slope is at least first order.
  auto pos = rpt.find("observed order (l1_error");
  auto colon = rpt.find(':', pos);
  double slope = std::strtod(rpt.c_str() + colon + 1, nullptr);
  CHECK(slope >= 0.8);

  // Single-run report and failure modes.
  std::string single = report((dir / "n64").string());
  CHECK(single.find("run n64:") != std::string::npos);
  fs::path empty = fresh_dir("phasekin_cli_empty");
  CHECK_THROWS_AS(report(empty.string()), Error);
  CHECK_THROWS_AS(report((dir / "missing").string()), Error);
}

TEST_CASE("compare_kinetic_closure emits paired trajectories and gap columns") {
  std::string text = R"json({
    "schema_version": 1,
    "kind": "compare_kinetic_closure",
    "grid": {"dim": 1, "x_cells": [64], "x_extent": [[0.0, 6.283185307179586]],
             "p_cells": [32], "p_extent": [[-0.8, 0.8]]},
    "hamiltonian": {"kind": "nonrelativistic", "mass": 1.0},
    "initial": {"M0": {"profile": "uniform", "value": 1.0},
                "velocity": {"profile": "sine", "amplitude": 0.4}},
    "time": {"t_end": 0.25, "cfl": 0.4},
    "checks": ["cold_beam_gap"]
  })json";
  fs::path dir = fresh_dir("phasekin_cli_compare");
  Scenario s = parse_scenario_text(text);
  RunReport rep = run_and_write(s, (dir / "beam").string());
  CHECK(rep.columns[1] == "m0_gap_rel");
  CHECK(rep.columns[2] == "m1_gap_rel");
  CHECK(rep.rows.size() >= 2);
  // Coarse desk run: the gap stays bounded; the tight bound is in the
  // acceptance suite at the fine resolution.
  for (const auto &v : rep.verdicts) CHECK(v.measured <= 0.25);
}

TEST_CASE("closure scenarios run through the same config schema") {
  std::string text = R"json({
    "schema_version": 1,
    "kind": "closure0",
    "grid": {"dim": 1, "x_cells": [64], "x_extent": [[0.0, 6.283185307179586]]},
    "hamiltonian": {"kind": "radiation", "c": 1.0},
    "initial": {"M0": {"profile": "sine", "base": 1.0, "amplitude": 0.3},
                "phi": {"profile": "linear", "slope": 1.0}},
    "time": {"t_end": 0.3, "cfl": 0.4},
    "checks": ["hamiltonian_drift"]
  })json";
  Scenario s = parse_scenario_text(text);
  RunReport rep = run(s);
  CHECK(rep.all_pass());
}

TEST_CASE("PHASEKIN_OUT overrides the configured output directory") {
  fs::path dir = fresh_dir("phasekin_cli_envvar");
  setenv("PHASEKIN_OUT", (dir / "env").c_str(), 1);
  Scenario s = parse_scenario_text(kKineticScenario);
  run_and_write(s);
  unsetenv("PHASEKIN_OUT");
  CHECK(fs::exists(dir / "env" / "diagnostics.csv"));
}
