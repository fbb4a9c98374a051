#include <CLI11.hpp>
#include <iostream>

#include "phasekin/runner.hpp"

int main(int argc, char **argv) {
  CLI::App app{"phasekin: phase-space kinetic transport, moment closures and 2T radiation hydrodynamics"};
  app.require_subcommand(1);

  std::string scenario_path, run_dir, outdir;

  CLI::App *cmd_run = app.add_subcommand("run", "execute a scenario and write CSV artifacts");
  cmd_run->add_option("scenario", scenario_path, "scenario file (JSON)")->required();
  cmd_run->add_option("-o,--out", outdir, "output directory (overrides config and PHASEKIN_OUT)");

  CLI::App *cmd_report = app.add_subcommand("report", "summarize a run directory (or a family of runs)");
  cmd_report->add_option("dir", run_dir, "run directory")->required();

  CLI::App *cmd_validate = app.add_subcommand("validate", "check a scenario file, printing every error");
  cmd_validate->add_option("scenario", scenario_path, "scenario file (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) {
      phasekin::Scenario s = phasekin::parse_scenario(scenario_path);
      phasekin::RunReport rep = phasekin::run_and_write(s, outdir);
      for (const auto &w : rep.warnings) std::cerr << "warning: " << w << "\n";
      for (const auto &v : rep.verdicts)
        std::cout << (v.pass ? "PASS" : "FAIL") << "  " << v.name
                  << "  measured=" << phasekin::format_double(v.measured)
                  << "  tolerance=" << phasekin::format_double(v.tolerance) << "\n";
      return rep.all_pass() ? 0 : 1;
    }
    if (cmd_report->parsed()) {
      std::cout << phasekin::report(run_dir);
      return 0;
    }
    if (cmd_validate->parsed()) {
      auto errs = phasekin::validate_scenario_file(scenario_path);
      if (errs.empty()) {
        std::cout << "valid\n";
        return 0;
      }
      for (const auto &e : errs) std::cout << "error: " << e << "\n";
      return 1;
    }
  } catch (const phasekin::ScenarioValidationError &e) {
    for (const auto &msg : e.errors) std::cerr << "error: " << msg << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
