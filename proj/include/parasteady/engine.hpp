#pragma once

#include "parasteady/problem.hpp"
#include "parasteady/propagators.hpp"
#include "parasteady/spectral.hpp"
#include "parasteady/types.hpp"

#include <string>
#include <vector>

namespace parasteady {

enum class SolverVariant {
  Sequential,          ///< plain period-after-period time stepping
  ClassicParareal,     ///< initial value problem, no periodicity coupling
  PPIC,                ///< periodic Parareal with initial-value coarse update
  PPPCDirect,          ///< periodic Parareal, coarse cyclic system solved directly
  PPPCFixedPoint,      ///< coarse cyclic system solved by block sweeps
  PPPCMultiharmonic,   ///< coarse cyclic system diagonalized by the DFT
};

SolverVariant parse_variant(const std::string& name);
std::string variant_name(SolverVariant variant);

/// How PP-PC solves its coarse cyclic correction system.
enum class CyclicSolverKind { Direct, FixedPoint, Multiharmonic };

struct IterationRecord {
  int k = 0;
  double jump = 0.0;
  double seconds = 0.0;
  int coarse_sweeps = 0;  ///< fixed-point variant only
};

enum class SolveStatus { Converged, MaxIterations };

struct ConvergenceHistory {
  std::vector<IterationRecord> iterations;
  SolveStatus status = SolveStatus::MaxIterations;
  double fine_seconds = 0.0;      ///< wall time in parallel fine propagation
  double coarse_seconds = 0.0;    ///< wall time in coarse propagation/updates
  double spectral_seconds = 0.0;  ///< wall time in the cyclic correction solve
  double total_seconds = 0.0;
  /// Periodicity defect of the final iterate where the scheme tracks one
  /// (PP-IC, sequential); zero otherwise.
  double final_defect = 0.0;

  bool converged() const { return status == SolveStatus::Converged; }
  int count() const { return static_cast<int>(iterations.size()); }
  double final_jump() const { return iterations.empty() ? 0.0 : iterations.back().jump; }
};

/// Shared iteration controls.  The initial iterate of every variant is a
/// sequential coarse sweep (from u0 for the initial value solver, from zero
/// for the periodic ones).
struct EngineSettings {
  explicit EngineSettings(TimeMesh m) : mesh(m) {}

  TimeMesh mesh;
  double tol = 1e-6;
  int max_iterations = 50;
  int workers = 1;
  NewtonSettings newton{};
  /// PP-PC multiharmonic: mirror conjugate bins instead of solving them.
  bool use_conjugate_symmetry = true;
  /// PP-PC on nonlinear problems freezes the coarse operator at this state;
  /// empty means the zero state.
  StateVector frozen_reference;
  /// PP-PC fixed-point coarse solve controls.
  double fixed_point_tol = 1e-12;
  int fixed_point_max_sweeps = 1000;
};

/// max_n ||a_n - b_n||_2 / max(1, max_n ||a_n||_2): the relative change
/// between two iterates, and the convergence quantity of every variant.
double jump_norm(const std::vector<StateVector>& current, const std::vector<StateVector>& previous);

/// Linear surrogate with the stiffness frozen at the reference state (zero
/// if empty): the coarse operator PP-PC uses for nonlinear problems.  Fine
/// propagation stays fully nonlinear, so the fixed point of the iteration is
/// still the nonlinear periodic solution.  Linear problems pass through
/// unchanged.
PeriodicProblem frozen_coarse_linearization(const PeriodicProblem& problem,
                                            const StateVector& reference = {});

struct PeriodicSolveResult {
  PeriodicTrajectory trajectory;
  ConvergenceHistory history;
};

struct InitialValueSolveResult {
  std::vector<StateVector> states;  ///< N + 1 states at T_0 .. T_N
  ConvergenceHistory history;
};

/// Classical Parareal for the initial value problem on [0, T]: fine
/// propagations of all subintervals run concurrently, the serial coarse
/// correction uses
///   U_n <- F_n(U(old)_{n-1}) + G_n(U(new)_{n-1}) - G_n(U(old)_{n-1}).
/// Once the predecessor state stops changing the correction cancels exactly,
/// so iteration k reproduces the sequential fine solution on the first k
/// subintervals and the method terminates after at most N iterations.
InitialValueSolveResult classic_parareal(const PeriodicProblem& problem, const StateVector& u0,
                                         const EngineSettings& settings);

/// Periodic Parareal with initial-value coarse update: classical Parareal,
/// plus the periodicity condition enforced by relaxation, U_0 <- U(old)_N
/// each iteration.  Converges once both the Parareal jump and the
/// periodicity defect ||U_N - U_0|| / max(1, ||U_N||) are below tol.  The
/// defect shrinks roughly like the transient of the underlying problem, one
/// period per iteration.
PeriodicSolveResult solve_pp_ic(const PeriodicProblem& problem, const EngineSettings& settings);

/// Periodic Parareal with periodic coarse correction: each iteration runs
/// all 2N propagations concurrently, then solves the coarse cyclic system
///   Q U_n - C U_{n-1 mod N} = Q (F_n - G_n) + f(T_n)
/// for the whole new iterate at once, coupling the period ends through the
/// corner block instead of a relaxation sweep.  Nonlinear problems use the
/// frozen coarse linearization; fine propagation stays nonlinear.
PeriodicSolveResult solve_pp_pc(const PeriodicProblem& problem, const EngineSettings& settings,
                                CyclicSolverKind kind = CyclicSolverKind::Multiharmonic);

/// max_n ||F_n(U_{n-1 mod N}) - U_n|| / max(1, max_n ||U_n||): how far a
/// candidate trajectory is from a fixed point of the cyclic fine propagator,
/// i.e. from the time-discrete periodic solution.
double fine_periodicity_defect(const PeriodicProblem& problem,
                               const PeriodicTrajectory& trajectory, const TimeMesh& mesh,
                               const NewtonSettings& newton = {}, int workers = 1);

}  // namespace parasteady
