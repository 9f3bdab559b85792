#pragma once

#include "sinai/config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace sinai {

/// Result of one experiment run: the summary record that was written to
/// summary.json plus the process exit code (0 iff every configured
/// assertion passed).
struct RunOutcome {
    int exit_code = 0;
    nlohmann::json summary;
};

/// The experiment names the CLI exposes as subcommands.
const std::vector<std::string>& experiment_names();

/// One-line description of an experiment (for CLI help).
std::string experiment_description(const std::string& name);

/// Runs one experiment to completion: writes CSV curves, summary.json
/// and manifest.json under cfg.out_dir. Progress and resample counters
/// go to `diag`, never into the data artifacts. Configuration problems
/// throw ConfigError; experiment-level failures (bad tables, degenerate
/// fits where assertions demand one) are reported as failed checks in
/// the summary with a nonzero exit code.
RunOutcome run_experiment(const ExperimentConfig& cfg, std::ostream& diag);

} // namespace sinai
