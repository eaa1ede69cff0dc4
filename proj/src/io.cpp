#include "parasteady/io.hpp"

#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace parasteady {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("io: cannot write " + path);
  return out;
}

/// Everything run_solve needs to report about one finished variant.
struct RunOutcome {
  std::vector<StateVector> states;
  ConvergenceHistory history;
  bool converged = false;
};

RunOutcome execute_variant(SolverVariant variant, const PeriodicProblem& problem,
                           const TimeMesh& mesh, const RunConfig& config) {
  EngineSettings settings(mesh);
  settings.tol = config.tol;
  settings.max_iterations = config.max_iterations;
  settings.workers = config.workers;
  settings.use_conjugate_symmetry = config.use_conjugate_symmetry;
  settings.frozen_reference = config.frozen_reference;

  RunOutcome outcome;
  switch (variant) {
    case SolverVariant::Sequential: {
      const auto t0 = std::chrono::steady_clock::now();
      SteadyStateResult res =
          sequential_steady_state(problem, mesh, config.tol, config.max_periods);
      outcome.states = res.trajectory.states;
      outcome.converged = res.converged;
      auto& h = outcome.history;
      for (int p = 0; p < res.periods; ++p)
        h.iterations.push_back({p, res.period_defects[p], res.period_seconds[p], 0});
      h.status = res.converged ? SolveStatus::Converged : SolveStatus::MaxIterations;
      h.final_defect = res.period_defects.empty() ? 0.0 : res.period_defects.back();
      h.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      h.fine_seconds = h.total_seconds;  // sequential time stepping is all fine propagation
      break;
    }
    case SolverVariant::ClassicParareal: {
      InitialValueSolveResult res =
          classic_parareal(problem, StateVector::Zero(problem.dim()), settings);
      outcome.states = std::move(res.states);
      outcome.history = std::move(res.history);
      outcome.converged = outcome.history.converged();
      break;
    }
    case SolverVariant::PPIC: {
      PeriodicSolveResult res = solve_pp_ic(problem, settings);
      outcome.states = std::move(res.trajectory.states);
      outcome.history = std::move(res.history);
      outcome.converged = outcome.history.converged();
      break;
    }
    case SolverVariant::PPPCDirect:
    case SolverVariant::PPPCFixedPoint:
    case SolverVariant::PPPCMultiharmonic: {
      const CyclicSolverKind kind = variant == SolverVariant::PPPCDirect
                                        ? CyclicSolverKind::Direct
                                        : (variant == SolverVariant::PPPCFixedPoint
                                               ? CyclicSolverKind::FixedPoint
                                               : CyclicSolverKind::Multiharmonic);
      PeriodicSolveResult res = solve_pp_pc(problem, settings, kind);
      outcome.states = std::move(res.trajectory.states);
      outcome.history = std::move(res.history);
      outcome.converged = outcome.history.converged();
      break;
    }
  }
  return outcome;
}

void write_report_json(const std::string& path, const RunConfig& config,
                       const PeriodicProblem& problem, SolverVariant variant,
                       const RunOutcome& outcome, int exit_code) {
  const auto& h = outcome.history;
  json report = {
      {"variant", variant_name(variant)},
      {"problem", config.problem.name},
      {"dim", problem.dim()},
      {"mesh",
       {{"subintervals", config.subintervals},
        {"fine_steps", config.fine_steps},
        {"period", problem.period()}}},
      {"tol", config.tol},
      {"max_iterations", config.max_iterations},
      {"workers", config.workers},
      {"status", h.converged() ? "converged" : "max_iterations"},
      {"converged", outcome.converged},
      {"iterations", h.count()},
      {"final_jump", h.final_jump()},
      {"final_defect", h.final_defect},
      {"timings",
       {{"fine_s", h.fine_seconds},
        {"coarse_s", h.coarse_seconds},
        {"spectral_solve_s", h.spectral_seconds},
        {"total_s", h.total_seconds}}},
      {"exit_code", exit_code},
  };
  open_out(path) << report.dump(2) << "\n";
}

void print_history(const ConvergenceHistory& history, SolverVariant variant) {
  if (variant == SolverVariant::Sequential) return;  // one row per period is too chatty
  for (const auto& rec : history.iterations)
    std::printf("  k=%3d  jump=%.3e  (%.3f s)\n", rec.k, rec.jump, rec.seconds);
}

int finish_run(const RunConfig& config, const PeriodicProblem& problem, const TimeMesh& mesh,
               SolverVariant variant, const RunOutcome& outcome) {
  namespace fs = std::filesystem;
  fs::create_directories(config.output_dir);
  const std::string dir = config.output_dir + "/";
  const int exit_code = outcome.converged ? 0 : 2;

  write_trajectory_csv(dir + "trajectory.csv", outcome.states, mesh);
  write_history_csv(dir + "history.csv", outcome.history);
  write_report_json(dir + "report.json", config, problem, variant, outcome, exit_code);

  print_history(outcome.history, variant);
  const auto& h = outcome.history;
  std::printf("%s %s after %d iterations: final jump %.3e", variant_name(variant).c_str(),
              outcome.converged ? "converged" : "did NOT converge", h.count(), h.final_jump());
  if (h.final_defect > 0.0) std::printf(", periodicity defect %.3e", h.final_defect);
  std::printf("\n");
  std::printf("timings: fine %.3f s, coarse %.3f s, spectral %.3f s, total %.3f s\n",
              h.fine_seconds, h.coarse_seconds, h.spectral_seconds, h.total_seconds);
  std::printf("outputs: %strajectory.csv %shistory.csv %sreport.json\n", dir.c_str(), dir.c_str(),
              dir.c_str());
  return exit_code;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(const std::string& path, const std::vector<StateVector>& states,
                          const TimeMesh& mesh) {
  auto out = open_out(path);
  const int d = states.empty() ? 0 : static_cast<int>(states.front().size());
  out << "n,t";
  for (int j = 0; j < d; ++j) out << ",u" << j;
  out << "\n";
  for (size_t n = 0; n < states.size(); ++n) {
    out << n << "," << format_double(mesh.boundary(static_cast<int>(n)));
    for (int j = 0; j < d; ++j) out << "," << format_double(states[n](j));
    out << "\n";
  }
  if (!out) throw std::runtime_error("io: write failed for " + path);
}

void write_history_csv(const std::string& path, const ConvergenceHistory& history) {
  auto out = open_out(path);
  out << "k,jump_norm,wall_time_s\n";
  for (const auto& rec : history.iterations)
    out << rec.k << "," << format_double(rec.jump) << "," << format_double(rec.seconds) << "\n";
  if (!out) throw std::runtime_error("io: write failed for " + path);
}

int run_solve(const RunConfig& config) {
  const SolverVariant variant = parse_variant(config.variant);
  const PeriodicProblem problem = build_problem(config.problem);
  const TimeMesh mesh = make_mesh(config, problem);
  std::printf("solve: problem=%s dim=%d N=%d s=%d variant=%s workers=%d tol=%g\n",
              config.problem.name.c_str(), problem.dim(), mesh.subintervals, mesh.fine_steps,
              config.variant.c_str(), config.workers, config.tol);
  const RunOutcome outcome = execute_variant(variant, problem, mesh, config);
  return finish_run(config, problem, mesh, variant, outcome);
}

int run_compare(const RunConfig& config) {
  if (config.compare_variants.size() < 2)
    throw std::runtime_error("io: compare needs at least 2 variants");
  const PeriodicProblem problem = build_problem(config.problem);
  const TimeMesh mesh = make_mesh(config, problem);
  std::printf("compare: problem=%s dim=%d N=%d s=%d workers=%d tol=%g\n",
              config.problem.name.c_str(), problem.dim(), mesh.subintervals, mesh.fine_steps,
              config.workers, config.tol);

  struct Row {
    std::string variant;
    int iterations = 0;
    bool converged = false;
    double seconds = 0.0;
    std::string error;
  };
  std::vector<Row> rows;
  for (const auto& name : config.compare_variants) {
    Row row;
    row.variant = name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const RunOutcome outcome =
          execute_variant(parse_variant(name), problem, mesh, config);
      row.iterations = outcome.history.count();
      row.converged = outcome.converged;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rows.push_back(std::move(row));
  }

  namespace fs = std::filesystem;
  fs::create_directories(config.output_dir);
  const std::string path = config.output_dir + "/compare.csv";
  auto out = open_out(path);
  out << "variant,iterations,converged,wall_time_s\n";
  for (const auto& row : rows)
    out << row.variant << "," << row.iterations << "," << (row.converged ? "true" : "false")
        << "," << format_double(row.seconds) << "\n";
  if (!out) throw std::runtime_error("io: write failed for " + path);

  std::printf("%-22s %10s %10s %12s\n", "variant", "iterations", "converged", "wall_time_s");
  bool any_converged = false;
  for (const auto& row : rows) {
    std::printf("%-22s %10d %10s %12.3f\n", row.variant.c_str(), row.iterations,
                row.converged ? "yes" : "no", row.seconds);
    if (!row.error.empty()) std::printf("  error: %s\n", row.error.c_str());
    any_converged = any_converged || row.converged;
  }
  std::printf("outputs: %s\n", path.c_str());
  return any_converged ? 0 : 2;
}

int run_oracle(const RunConfig& config) {
  RunConfig oracle_config = config;
  oracle_config.variant = "sequential";
  return run_solve(oracle_config);
}

}  // namespace parasteady
