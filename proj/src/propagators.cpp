#include "parasteady/propagators.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <utility>

namespace parasteady {

namespace {

/// Residual R(u) = M (u - u_prev)/dt + K(u) u - f_next.
StateVector step_residual(const PeriodicProblem& problem, const SparseMatrix& stiffness,
                          const StateVector& u, const StateVector& u_prev, double dt,
                          const StateVector& f_next) {
  return problem.mass() * ((u - u_prev) / dt) + stiffness * u - f_next;
}

[[noreturn]] void step_failure(const char* what, double t_next, double residual) {
  std::ostringstream msg;
  msg << "propagator: " << what << " at t = " << t_next << " (residual " << residual << ")";
  throw std::runtime_error(msg.str());
}

}  // namespace

StepResult newton_step(const PeriodicProblem& problem, const StateVector& u_prev, double t_next,
                       double dt, const NewtonSettings& settings) {
  if (!(dt > 0.0)) throw std::runtime_error("propagator: step size must be positive");
  if (settings.max_iter < 1)
    throw std::runtime_error("propagator: Newton needs at least one iteration");
  const StateVector f_next = eval_excitation(problem, t_next);
  const double tol = settings.tol_abs + settings.tol_rel * f_next.norm();

  StepResult result;
  result.state = u_prev;
  SparseMatrix stiffness = problem.stiffness_at(result.state);
  for (int it = 1; it <= settings.max_iter; ++it) {
    const StateVector residual =
        step_residual(problem, stiffness, result.state, u_prev, dt, f_next);

    SparseMatrix system = problem.mass() / dt + problem.newton_matrix_at(result.state);
    Eigen::SimplicialLDLT<SparseMatrix> factor(system);
    if (factor.info() != Eigen::Success) step_failure("step system not factorizable", t_next, 0.0);
    const StateVector update = factor.solve(-residual);
    if (!update.allFinite()) step_failure("step system singular", t_next, residual.norm());

    result.state += settings.damping * update;
    stiffness = problem.stiffness_at(result.state);
    const double post_norm =
        step_residual(problem, stiffness, result.state, u_prev, dt, f_next).norm();
    result.residual_norms.push_back(post_norm);
    result.iterations = it;
    if (!std::isfinite(post_norm)) step_failure("Newton iteration diverged", t_next, post_norm);
    if (post_norm <= tol) return result;
  }
  step_failure("Newton did not converge", t_next, result.residual_norms.back());
}

StateVector coarse_step(const PeriodicProblem& problem, const StateVector& u_prev, double t_next,
                        double dt, const NewtonSettings& settings) {
  return newton_step(problem, u_prev, t_next, dt, settings).state;
}

Propagator::Propagator(PeriodicProblem problem, TimeMesh mesh, NewtonSettings newton)
    : problem_(std::move(problem)), mesh_(std::move(mesh)), newton_(newton) {
  if (problem_.period() != mesh_.period)
    throw std::runtime_error("propagator: mesh period does not match the problem");
}

std::shared_ptr<const Propagator::Factorization> Propagator::linear_factor(double dt) const {
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto found = factor_cache_.find(dt);
    if (found != factor_cache_.end()) return found->second;
  }
  SparseMatrix system = problem_.mass() / dt + problem_.linear_stiffness();
  auto factor = std::make_shared<Factorization>(system);
  if (factor->info() != Eigen::Success)
    throw std::runtime_error("propagator: linear step system not factorizable");
  std::lock_guard<std::mutex> lock(cache_mutex_);
  return factor_cache_.emplace(dt, std::move(factor)).first->second;
}

StateVector Propagator::step(const StateVector& u_prev, double t_next, double dt) const {
  if (!problem_.linear()) return newton_step(problem_, u_prev, t_next, dt, newton_).state;

  // Linear fast path: reuse the cached factorization of M/dt + K.
  const auto factor = linear_factor(dt);
  const StateVector rhs = problem_.mass() * (u_prev / dt) + eval_excitation(problem_, t_next);
  StateVector u = factor->solve(rhs);
  if (!u.allFinite()) step_failure("step system singular", t_next, 0.0);
  return u;
}

StateVector Propagator::coarse_propagate(int n, const StateVector& u_start) const {
  if (n < 1 || n > mesh_.subintervals)
    throw std::runtime_error("propagator: subinterval index out of range");
  return step(u_start, mesh_.boundary(n), mesh_.coarse_dt());
}

StateVector Propagator::fine_propagate(int n, const StateVector& u_start) const {
  if (n < 1 || n > mesh_.subintervals)
    throw std::runtime_error("propagator: subinterval index out of range");
  const double t_left = mesh_.boundary(n - 1);
  const double dt = mesh_.fine_dt();
  StateVector u = u_start;
  for (int j = 1; j <= mesh_.fine_steps; ++j) {
    // The last substep lands exactly on the subinterval boundary so fine and
    // coarse grids share identical boundary times.
    const double t_next = j == mesh_.fine_steps ? mesh_.boundary(n) : t_left + j * dt;
    u = step(u, t_next, dt);
  }
  return u;
}

SteadyStateResult sequential_steady_state(const PeriodicProblem& problem, const TimeMesh& mesh,
                                          double tol, int max_periods,
                                          const NewtonSettings& settings) {
  if (!(tol > 0.0)) throw std::runtime_error("propagator: tolerance must be positive");
  if (max_periods < 1) throw std::runtime_error("propagator: need at least one period");

  const Propagator propagator(problem, mesh, settings);
  SteadyStateResult result;
  StateVector u = StateVector::Zero(problem.dim());
  for (int p = 1; p <= max_periods; ++p) {
    const auto t_period = std::chrono::steady_clock::now();
    PeriodicTrajectory traj;
    traj.period = mesh.period;
    traj.states.reserve(static_cast<size_t>(mesh.subintervals));
    traj.states.push_back(u);
    for (int n = 1; n < mesh.subintervals; ++n)
      traj.states.push_back(propagator.fine_propagate(n, traj.states.back()));
    const StateVector u_end = propagator.fine_propagate(mesh.subintervals, traj.states.back());

    const double defect = (u_end - u).norm() / std::max(1.0, u_end.norm());
    result.period_defects.push_back(defect);
    result.period_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_period).count());
    result.periods = p;
    result.trajectory = std::move(traj);
    u = u_end;
    if (defect <= tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace parasteady
