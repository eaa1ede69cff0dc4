#pragma once

#include "parasteady/config.hpp"
#include "parasteady/engine.hpp"

#include <string>
#include <vector>

namespace parasteady {

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double value);

/// Writes one row per state: n, T_n, then the d state entries.  Accepts both
/// the N periodic boundary states and the N+1 states of an initial-value run.
void write_trajectory_csv(const std::string& path, const std::vector<StateVector>& states,
                          const TimeMesh& mesh);

/// Columns k, jump_norm, wall_time_s; one row per recorded iteration.
void write_history_csv(const std::string& path, const ConvergenceHistory& history);

/// Runs the configured variant and writes trajectory.csv, history.csv and
/// report.json into the output directory.  Returns the process exit code:
/// 0 converged, 2 tolerance not reached.
int run_solve(const RunConfig& config);

/// Runs every configured variant on the identical problem and initial
/// iterate, writes compare.csv and prints a summary table.  Returns 0 if at
/// least one variant converged, 2 if all failed.
int run_compare(const RunConfig& config);

/// Runs the sequential steady-state reference and writes the same outputs as
/// run_solve (history rows are per-period defects).
int run_oracle(const RunConfig& config);

}  // namespace parasteady
