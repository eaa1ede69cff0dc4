#include "parasteady/config.hpp"
#include "parasteady/io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>

namespace {

struct CommonArgs {
  std::optional<std::string> config_path;
  parasteady::CliOverrides overrides;
};

void add_common_options(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON configuration file");
  cmd->add_option("--problem", args.overrides.problem,
                  "built-in problem (scalar, dae_pair, coax, coax_linear) or "
                  "\"mass.mtx,stiffness.mtx,excitation.json\"");
  cmd->add_option("--N", args.overrides.subintervals, "subintervals per period");
  cmd->add_option("--fine-steps", args.overrides.fine_steps, "fine steps per subinterval");
  cmd->add_option("--tol", args.overrides.tol, "relative convergence tolerance");
  cmd->add_option("--kmax", args.overrides.max_iterations, "maximum outer iterations");
  cmd->add_option("--workers", args.overrides.workers,
                  "worker threads (0 = all hardware threads)");
  cmd->add_option("--out", args.overrides.output_dir, "output directory");
  cmd->add_flag("--no-real-symmetry", args.overrides.no_real_symmetry,
                "solve every harmonic block instead of mirroring conjugate bins");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parasteady: parallel-in-time steady-state solver for time-periodic "
               "eddy-current DAE problems"};
  app.require_subcommand(1);

  CommonArgs solve_args, compare_args, oracle_args;

  CLI::App* solve = app.add_subcommand("solve", "run one solver variant");
  add_common_options(solve, solve_args);
  solve->add_option("--variant", solve_args.overrides.variant,
                    "sequential, parareal, pp_ic, pp_pc_direct, pp_pc_fixedpoint or "
                    "pp_pc_multiharmonic");

  CLI::App* compare = app.add_subcommand("compare", "run several variants on the same problem");
  add_common_options(compare, compare_args);
  compare->add_option("--variants", compare_args.overrides.compare_variants,
                      "variants to compare")
      ->delimiter(',');

  CLI::App* oracle = app.add_subcommand("oracle", "sequential steady-state reference run");
  add_common_options(oracle, oracle_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    // CLI11 returns 0 for --help; anything else is a usage error.
    return code == 0 ? 0 : 1;
  }

  try {
    if (solve->parsed()) {
      const auto config = parasteady::parse_config(solve_args.config_path, solve_args.overrides);
      return parasteady::run_solve(config);
    }
    if (compare->parsed()) {
      const auto config =
          parasteady::parse_config(compare_args.config_path, compare_args.overrides);
      return parasteady::run_compare(config);
    }
    const auto config = parasteady::parse_config(oracle_args.config_path, oracle_args.overrides);
    return parasteady::run_oracle(config);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
