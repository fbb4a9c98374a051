#pragma once

#include <string>
#include <vector>

#include "phasekin/scenario.hpp"

namespace phasekin {

struct Verdict {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct RunReport {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  // Final state fields, one row per cell.
  std::vector<std::string> field_columns;
  std::vector<std::vector<double>> field_rows;
  std::vector<Verdict> verdicts;
  std::vector<std::string> warnings;
  // Extra scalar results (resolution, error metrics) for refinement reports.
  std::vector<std::pair<std::string, double>> metrics;

  bool all_pass() const {
    for (const auto &v : verdicts)
      if (!v.pass) return false;
    return true;
  }
};

// Executes the scenario; deterministic for a fixed config and build.
RunReport run(const Scenario &scenario);

// Executes and writes diagnostics.csv, fields_final.csv, verdicts.csv,
// meta.json and report.txt into the output directory. Resolution order for
// the directory: explicit argument, PHASEKIN_OUT environment variable,
// scenario output.directory.
RunReport run_and_write(const Scenario &scenario, const std::string &outdir_override = "");

// Human-readable summary of one run directory, or of a directory of runs;
// computes observed convergence order when several runs carry an L1 error
// metric and a resolution.
std::string report(const std::string &run_dir);

// 17 significant digits, round-trip exact.
std::string format_double(double v);

}  // namespace phasekin
