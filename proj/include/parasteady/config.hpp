#pragma once

#include "parasteady/problem.hpp"
#include "parasteady/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace parasteady {

/// Problem selection: a built-in model name with parameters, or Matrix
/// Market files plus an excitation description.
struct ProblemSpec {
  std::string name = "coax";  ///< scalar | dae_pair | coax | coax_linear | files
  CoaxCableParams coax{};
  double scalar_m = 1.0;
  double scalar_k = 1.0;
  double scalar_amplitude = 1.0;
  double scalar_frequency_hz = 50.0;
  std::string mass_path;
  std::string stiffness_path;
  std::string excitation_path;
};

/// Fully resolved run description: built-in defaults, overlaid by the JSON
/// config file, overlaid by command-line flags (highest precedence).
struct RunConfig {
  ProblemSpec problem{};
  int subintervals = 20;
  int fine_steps = 100;
  std::string variant = "pp_pc_multiharmonic";
  double tol = 1e-6;
  int max_iterations = 50;
  int workers = 0;  ///< resolved to >= 1 at parse time; 0 = hardware threads
  std::string output_dir = "out";
  bool use_conjugate_symmetry = true;
  StateVector frozen_reference;  ///< empty = zero state
  int max_periods = 2000;        ///< sequential variant / oracle
  std::vector<std::string> compare_variants = {"pp_ic", "pp_pc_fixedpoint",
                                               "pp_pc_multiharmonic"};
};

/// Command-line values; unset options leave the file/default values alone.
struct CliOverrides {
  std::optional<std::string> problem;  ///< name or "mass.mtx,stiffness.mtx,excitation.json"
  std::optional<std::string> variant;
  std::optional<int> subintervals;
  std::optional<int> fine_steps;
  std::optional<double> tol;
  std::optional<int> max_iterations;
  std::optional<int> workers;
  std::optional<std::string> output_dir;
  bool no_real_symmetry = false;
  std::vector<std::string> compare_variants;
};

/// Parses and validates a run configuration.  Unknown JSON keys are rejected
/// with an error naming them; CLI values override file values override
/// defaults.  A missing path uses defaults plus overrides.
RunConfig parse_config(const std::optional<std::string>& config_path,
                       const CliOverrides& overrides);

/// Same, from an in-memory JSON document (used by tests and parse_config).
RunConfig parse_config_text(const std::string& json_text, const CliOverrides& overrides);

/// Instantiates the configured problem.
PeriodicProblem build_problem(const ProblemSpec& spec);

/// Mesh for the configured subdivision; the period comes from the problem.
TimeMesh make_mesh(const RunConfig& config, const PeriodicProblem& problem);

}  // namespace parasteady
