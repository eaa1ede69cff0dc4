#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <complex>
#include <stdexcept>
#include <vector>

namespace parasteady {

using SparseMatrix = Eigen::SparseMatrix<double>;
using SparseMatrixC = Eigen::SparseMatrix<std::complex<double>>;
using Triplet = Eigen::Triplet<double>;
using StateVector = Eigen::VectorXd;

/// Uniform two-level mesh on one period: N subintervals of length dT = T/N,
/// each split into s fine steps of length dt = dT/s.  Subinterval boundaries
/// are always computed as T_n = n*T/N rather than accumulated, so boundary
/// times are identical wherever they appear.
struct TimeMesh {
  int subintervals = 0;  ///< N
  int fine_steps = 1;    ///< s, fine steps per subinterval
  double period = 0.0;   ///< T

  TimeMesh(int n, int s, double t) : subintervals(n), fine_steps(s), period(t) {
    if (n < 2) throw std::runtime_error("mesh: need at least 2 subintervals");
    if (s < 1) throw std::runtime_error("mesh: need at least 1 fine step per subinterval");
    if (!(t > 0.0)) throw std::runtime_error("mesh: period must be positive");
  }

  double coarse_dt() const { return period / subintervals; }
  double fine_dt() const { return coarse_dt() / fine_steps; }

  /// Boundary time T_n = n*T/N; T_N snaps to T exactly.
  double boundary(int n) const {
    if (n == subintervals) return period;
    return static_cast<double>(n) * period / subintervals;
  }
};

/// States at the N subinterval boundaries T_0 .. T_{N-1} of one period.  The
/// wrap state at T_N is identified with states[0] by periodicity.
struct PeriodicTrajectory {
  std::vector<StateVector> states;
  double period = 0.0;

  int size() const { return static_cast<int>(states.size()); }
  int dim() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }

  /// max_n ||U_n||_2, the scale used by relative convergence measures.
  double max_state_norm() const {
    double m = 0.0;
    for (const auto& u : states) m = std::max(m, u.norm());
    return m;
  }
};

}  // namespace parasteady
