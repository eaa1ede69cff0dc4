#include "parasteady/engine.hpp"

#include "parasteady/parallel.hpp"

#include <chrono>
#include <cmath>
#include <optional>
#include <utility>

namespace parasteady {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void validate_settings(const EngineSettings& s) {
  if (!(s.tol > 0.0)) throw std::runtime_error("engine: tolerance must be positive");
  if (s.max_iterations < 1) throw std::runtime_error("engine: need at least one iteration");
  if (s.workers < 1) throw std::runtime_error("engine: worker count must be >= 1");
}

double relative_defect(const StateVector& wrap, const StateVector& start) {
  return (wrap - start).norm() / std::max(1.0, wrap.norm());
}

}  // namespace

SolverVariant parse_variant(const std::string& name) {
  if (name == "sequential") return SolverVariant::Sequential;
  if (name == "parareal") return SolverVariant::ClassicParareal;
  if (name == "pp_ic") return SolverVariant::PPIC;
  if (name == "pp_pc_direct") return SolverVariant::PPPCDirect;
  if (name == "pp_pc_fixedpoint") return SolverVariant::PPPCFixedPoint;
  if (name == "pp_pc_multiharmonic") return SolverVariant::PPPCMultiharmonic;
  throw std::runtime_error("engine: unknown solver variant \"" + name + "\"");
}

std::string variant_name(SolverVariant variant) {
  switch (variant) {
    case SolverVariant::Sequential: return "sequential";
    case SolverVariant::ClassicParareal: return "parareal";
    case SolverVariant::PPIC: return "pp_ic";
    case SolverVariant::PPPCDirect: return "pp_pc_direct";
    case SolverVariant::PPPCFixedPoint: return "pp_pc_fixedpoint";
    case SolverVariant::PPPCMultiharmonic: return "pp_pc_multiharmonic";
  }
  throw std::runtime_error("engine: unknown solver variant");
}

double jump_norm(const std::vector<StateVector>& current,
                 const std::vector<StateVector>& previous) {
  if (current.empty() || current.size() != previous.size())
    throw std::runtime_error("engine: jump_norm needs two state lists of equal length");
  double change = 0.0, scale = 1.0;
  for (size_t n = 0; n < current.size(); ++n) {
    change = std::max(change, (current[n] - previous[n]).norm());
    scale = std::max(scale, current[n].norm());
  }
  return change / scale;
}

PeriodicProblem frozen_coarse_linearization(const PeriodicProblem& problem,
                                            const StateVector& reference) {
  if (problem.linear()) return problem;
  StateVector ref = reference;
  if (ref.size() == 0) ref = StateVector::Zero(problem.dim());
  if (ref.size() != problem.dim())
    throw std::runtime_error("engine: frozen reference state dimension mismatch");
  return PeriodicProblem(problem.mass(), problem.stiffness_at(ref), problem.excitation());
}

InitialValueSolveResult classic_parareal(const PeriodicProblem& problem, const StateVector& u0,
                                         const EngineSettings& settings) {
  validate_settings(settings);
  if (u0.size() != problem.dim())
    throw std::runtime_error("engine: initial state dimension mismatch");
  const TimeMesh& mesh = settings.mesh;
  const int n_sub = mesh.subintervals;
  const Propagator prop(problem, mesh, settings.newton);
  const auto t_start = Clock::now();

  InitialValueSolveResult result;
  auto& history = result.history;
  auto& u = result.states;
  u.assign(static_cast<size_t>(n_sub) + 1, u0);
  std::vector<StateVector> g_old(static_cast<size_t>(n_sub));
  {
    const auto t0 = Clock::now();
    for (int n = 1; n <= n_sub; ++n) {
      u[n] = prop.coarse_propagate(n, u[n - 1]);
      g_old[n - 1] = u[n];
    }
    history.coarse_seconds += seconds_since(t0);
  }

  std::vector<StateVector> fine_end(static_cast<size_t>(n_sub));
  for (int k = 0; k < settings.max_iterations; ++k) {
    const auto t_iter = Clock::now();
    const std::vector<StateVector> u_old = u;

    const auto t_fine = Clock::now();
    parallel_for(n_sub, settings.workers,
                 [&](int i) { fine_end[i] = prop.fine_propagate(i + 1, u_old[i]); });
    history.fine_seconds += seconds_since(t_fine);

    const auto t_coarse = Clock::now();
    for (int n = 1; n <= n_sub; ++n) {
      StateVector g_new = prop.coarse_propagate(n, u[n - 1]);
      // Correction form: once u[n-1] stops changing, g_new - g_old cancels
      // exactly and u[n] is the pure fine result.
      u[n] = fine_end[n - 1] + (g_new - g_old[n - 1]);
      g_old[n - 1] = std::move(g_new);
    }
    history.coarse_seconds += seconds_since(t_coarse);

    const double jump = jump_norm(u, u_old);
    history.iterations.push_back({k, jump, seconds_since(t_iter), 0});
    if (jump <= settings.tol) {
      history.status = SolveStatus::Converged;
      break;
    }
  }
  history.total_seconds = seconds_since(t_start);
  return result;
}

PeriodicSolveResult solve_pp_ic(const PeriodicProblem& problem, const EngineSettings& settings) {
  validate_settings(settings);
  const TimeMesh& mesh = settings.mesh;
  const int n_sub = mesh.subintervals;
  const Propagator prop(problem, mesh, settings.newton);
  const auto t_start = Clock::now();

  PeriodicSolveResult result;
  auto& history = result.history;
  std::vector<StateVector> u(static_cast<size_t>(n_sub) + 1,
                             StateVector::Zero(problem.dim()));
  std::vector<StateVector> g_old(static_cast<size_t>(n_sub));
  {
    const auto t0 = Clock::now();
    for (int n = 1; n <= n_sub; ++n) {
      u[n] = prop.coarse_propagate(n, u[n - 1]);
      g_old[n - 1] = u[n];
    }
    history.coarse_seconds += seconds_since(t0);
  }

  std::vector<StateVector> fine_end(static_cast<size_t>(n_sub));
  for (int k = 0; k < settings.max_iterations; ++k) {
    const auto t_iter = Clock::now();
    const std::vector<StateVector> u_old = u;

    const auto t_fine = Clock::now();
    parallel_for(n_sub, settings.workers,
                 [&](int i) { fine_end[i] = prop.fine_propagate(i + 1, u_old[i]); });
    history.fine_seconds += seconds_since(t_fine);

    const auto t_coarse = Clock::now();
    // Periodicity by relaxation: the new period start is the old period end.
    u[0] = u_old[n_sub];
    for (int n = 1; n <= n_sub; ++n) {
      StateVector g_new = prop.coarse_propagate(n, u[n - 1]);
      u[n] = fine_end[n - 1] + (g_new - g_old[n - 1]);
      g_old[n - 1] = std::move(g_new);
    }
    history.coarse_seconds += seconds_since(t_coarse);

    const double jump = jump_norm(u, u_old);
    const double defect = relative_defect(u[n_sub], u[0]);
    history.final_defect = defect;
    history.iterations.push_back({k, jump, seconds_since(t_iter), 0});
    if (jump <= settings.tol && defect <= settings.tol) {
      history.status = SolveStatus::Converged;
      break;
    }
  }
  result.trajectory.period = mesh.period;
  result.trajectory.states.assign(u.begin(), u.begin() + n_sub);
  history.total_seconds = seconds_since(t_start);
  return result;
}

PeriodicSolveResult solve_pp_pc(const PeriodicProblem& problem, const EngineSettings& settings,
                                CyclicSolverKind kind) {
  validate_settings(settings);
  const TimeMesh& mesh = settings.mesh;
  const int n_sub = mesh.subintervals;
  const auto t_start = Clock::now();

  PeriodicSolveResult result;
  auto& history = result.history;

  // Fine propagation keeps the full nonlinear problem; the coarse level and
  // the cyclic correction system use the frozen linearization.
  const PeriodicProblem coarse_problem =
      frozen_coarse_linearization(problem, settings.frozen_reference);
  const Propagator fine(problem, mesh, settings.newton);
  const Propagator coarse(coarse_problem, mesh, settings.newton);

  CyclicSystem system = make_cyclic_system(coarse_problem, mesh);
  std::optional<MultiharmonicCyclicSolver> harmonic_solver;
  if (kind == CyclicSolverKind::Multiharmonic) {
    const auto t0 = Clock::now();
    harmonic_solver.emplace(system,
                            MultiharmonicOptions{settings.use_conjugate_symmetry, settings.workers});
    history.spectral_seconds += seconds_since(t0);
  }

  std::vector<StateVector> u(static_cast<size_t>(n_sub), StateVector::Zero(problem.dim()));
  {
    const auto t0 = Clock::now();
    for (int n = 1; n < n_sub; ++n) u[n] = coarse.coarse_propagate(n, u[n - 1]);
    history.coarse_seconds += seconds_since(t0);
  }

  std::vector<StateVector> fine_end(static_cast<size_t>(n_sub));
  std::vector<StateVector> coarse_end(static_cast<size_t>(n_sub));
  for (int k = 0; k < settings.max_iterations; ++k) {
    const auto t_iter = Clock::now();

    const auto t_fine = Clock::now();
    parallel_for(n_sub, settings.workers,
                 [&](int i) { fine_end[i] = fine.fine_propagate(i + 1, u[i]); });
    history.fine_seconds += seconds_since(t_fine);

    const auto t_coarse = Clock::now();
    parallel_for(n_sub, settings.workers,
                 [&](int i) { coarse_end[i] = coarse.coarse_propagate(i + 1, u[i]); });
    history.coarse_seconds += seconds_since(t_coarse);

    const auto t_solve = Clock::now();
    system.rhs = assemble_rhs(fine_end, coarse_end, system, coarse_problem, mesh);
    PeriodicTrajectory next;
    int sweeps = 0;
    switch (kind) {
      case CyclicSolverKind::Direct:
        next = solve_cyclic_direct(system);
        break;
      case CyclicSolverKind::FixedPoint: {
        FixedPointResult fp = solve_cyclic_fixed_point(system, settings.fixed_point_tol,
                                                       settings.fixed_point_max_sweeps);
        if (!fp.converged)
          throw std::runtime_error("engine: coarse fixed-point solve did not converge");
        next = std::move(fp.trajectory);
        sweeps = fp.sweeps;
        break;
      }
      case CyclicSolverKind::Multiharmonic:
        next = harmonic_solver->solve(system.rhs);
        break;
    }
    history.spectral_seconds += seconds_since(t_solve);

    const double jump = jump_norm(next.states, u);
    history.iterations.push_back({k, jump, seconds_since(t_iter), sweeps});
    u = std::move(next.states);
    if (jump <= settings.tol) {
      history.status = SolveStatus::Converged;
      break;
    }
  }
  result.trajectory.period = mesh.period;
  result.trajectory.states = std::move(u);
  history.total_seconds = seconds_since(t_start);
  return result;
}

double fine_periodicity_defect(const PeriodicProblem& problem,
                               const PeriodicTrajectory& trajectory, const TimeMesh& mesh,
                               const NewtonSettings& newton, int workers) {
  if (trajectory.size() != mesh.subintervals)
    throw std::runtime_error("engine: trajectory length does not match the mesh");
  const Propagator prop(problem, mesh, newton);
  const int n_sub = mesh.subintervals;
  std::vector<StateVector> propagated(static_cast<size_t>(n_sub));
  parallel_for(n_sub, workers, [&](int i) {
    propagated[i] = prop.fine_propagate(i + 1, trajectory.states[i]);
  });
  double defect = 0.0;
  const double scale = std::max(1.0, trajectory.max_state_norm());
  for (int n = 0; n < n_sub; ++n) {
    const StateVector& target = trajectory.states[(n + 1) % n_sub];
    defect = std::max(defect, (propagated[n] - target).norm());
  }
  return defect / scale;
}

}  // namespace parasteady
