#pragma once

#include "parasteady/problem.hpp"
#include "parasteady/types.hpp"

#include <Eigen/SparseCholesky>

#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace parasteady {

/// Stopping rule and safeguards for the per-step Newton iteration.  The
/// residual test ||R|| <= tol_abs + tol_rel*||f(t_next)|| uses an absolute
/// floor because the excitation passes through zero twice per period, where
/// a purely relative test would chase roundoff.
struct NewtonSettings {
  double tol_abs = 1e-9;
  double tol_rel = 1e-8;
  int max_iter = 30;
  double damping = 1.0;
};

struct StepResult {
  StateVector state;
  int iterations = 0;
  /// Residual norm after each update; size equals iterations.
  std::vector<double> residual_norms;
};

/// One implicit Euler step of M du/dt + K(u) u = f: solves
///   M (u - u_prev)/dt + K(u) u = f(t_next)
/// by Newton's method with system matrix M/dt + d/du [K(u) u].  Always
/// performs at least one update, so linear problems take exactly one
/// iteration.  Throws if the step system is singular or Newton does not
/// reach the residual tolerance within max_iter updates.
StepResult newton_step(const PeriodicProblem& problem, const StateVector& u_prev, double t_next,
                       double dt, const NewtonSettings& settings = {});

/// Convenience wrapper around newton_step returning only the new state.
StateVector coarse_step(const PeriodicProblem& problem, const StateVector& u_prev, double t_next,
                        double dt, const NewtonSettings& settings = {});

/// Implicit Euler propagator over the subintervals of a two-level time mesh.
/// coarse_propagate takes one step of length dT = T/N; fine_propagate takes
/// s steps of length dT/s, with the last step landing exactly on the
/// subinterval boundary.  With s = 1 both propagators perform bit-identical
/// work.  For linear problems the factorization of M/dt + K is computed once
/// per distinct dt and shared; all const methods are safe to call
/// concurrently from several threads.
class Propagator {
 public:
  Propagator(PeriodicProblem problem, TimeMesh mesh, NewtonSettings newton = {});

  /// Propagates across subinterval n (from T_{n-1} to T_n), 1 <= n <= N.
  StateVector coarse_propagate(int n, const StateVector& u_start) const;
  StateVector fine_propagate(int n, const StateVector& u_start) const;

  const PeriodicProblem& problem() const { return problem_; }
  const TimeMesh& mesh() const { return mesh_; }
  const NewtonSettings& newton() const { return newton_; }

 private:
  using Factorization = Eigen::SimplicialLDLT<SparseMatrix>;

  StateVector step(const StateVector& u_prev, double t_next, double dt) const;
  std::shared_ptr<const Factorization> linear_factor(double dt) const;

  PeriodicProblem problem_;
  TimeMesh mesh_;
  NewtonSettings newton_;
  mutable std::mutex cache_mutex_;
  mutable std::map<double, std::shared_ptr<const Factorization>> factor_cache_;
};

struct SteadyStateResult {
  PeriodicTrajectory trajectory;  ///< boundary states of the last period run
  std::vector<double> period_defects;
  std::vector<double> period_seconds;
  int periods = 0;
  bool converged = false;
};

/// Time steps period after period from u = 0 until the start and end states
/// of a period agree: ||u(T) - u(0)|| / max(1, ||u(T)||) <= tol.  This is
/// the plain transient reference the parallel-in-time solvers are measured
/// against; for lightly damped problems it needs many periods.
SteadyStateResult sequential_steady_state(const PeriodicProblem& problem, const TimeMesh& mesh,
                                          double tol, int max_periods,
                                          const NewtonSettings& settings = {});

}  // namespace parasteady
