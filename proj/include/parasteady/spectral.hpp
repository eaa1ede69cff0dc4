#pragma once

#include "parasteady/problem.hpp"
#include "parasteady/types.hpp"

#include <Eigen/SparseLU>

#include <memory>
#include <vector>

namespace parasteady {

/// One member of the harmonic index set P = {-N/2+1, ..., N/2} (N even).
struct Harmonic {
  int index = 0;     ///< signed harmonic number p
  double omega = 0;  ///< angular frequency 2*pi*p/T
};

/// Harmonics in DFT bin order (0, 1, ..., N/2, -N/2+1, ..., -1): bin b holds
/// index b for b <= N/2 and b - N for larger b.  Rejects odd N, where the
/// index set is not symmetric around zero.
std::vector<Harmonic> frequency_set(int n_blocks, double period);

/// Unitary forward DFT across the trajectory index:
///   U_hat_b = N^{-1/2} sum_n U_n exp(-2*pi*i*b*n/N),
/// bins ordered as in frequency_set.  Preserves the stacked 2-norm.
std::vector<Eigen::VectorXcd> forward_dft(const PeriodicTrajectory& trajectory);

/// Unitary inverse DFT back to N real states.  The imaginary residue must be
/// negligible (conjugate-symmetric spectrum); otherwise this throws.
PeriodicTrajectory inverse_dft(const std::vector<Eigen::VectorXcd>& spectrum, double period);

/// Block data of the cyclic implicit-Euler system on one period: for rows
/// n = 0 .. N-1,
///   Q U_n - C U_{n-1 mod N} = rhs_n,   C = M/dT,  Q = C + K,
/// i.e. a block-circulant matrix with Q on the diagonal and -C on the
/// subdiagonal plus the top-right corner.
struct CyclicSystem {
  SparseMatrix c;
  SparseMatrix q;
  int blocks = 0;
  double period = 0.0;
  std::vector<StateVector> rhs;
};

/// Builds C and Q from a linear problem on the given mesh, with empty rhs.
CyclicSystem make_cyclic_system(const PeriodicProblem& problem, const TimeMesh& mesh);

/// Right-hand side of the corrector system from one iterate's propagated
/// endpoint states F_n, G_n (list index n-1 holds the propagation across
/// subinterval n): row 0 gets Q*(F_N - G_N) + f(T_N) and row n >= 1 gets
/// Q*(F_n - G_n) + f(T_n).  Both lists must have length N.
std::vector<StateVector> assemble_rhs(const std::vector<StateVector>& fine,
                                      const std::vector<StateVector>& coarse,
                                      const CyclicSystem& system, const PeriodicProblem& problem,
                                      const TimeMesh& mesh);

/// Solves the cyclic system as one sparse (N*d) x (N*d) LU factorization.
/// Exact up to factorization roundoff; the reference the cheaper solvers are
/// checked against.
PeriodicTrajectory solve_cyclic_direct(const CyclicSystem& system);

struct FixedPointResult {
  PeriodicTrajectory trajectory;
  int sweeps = 0;
  bool converged = false;
};

/// Solves the cyclic system by block forward substitution sweeps: row n is
/// solved with U_{n-1} from the current sweep and the wrap row 0 with U_{N-1}
/// from the previous one.  Converges linearly; the defect left by the wrap
/// coupling contracts with each sweep.  Stops when the largest block change
/// relative to max(1, max_n ||U_n||) drops below tol.
FixedPointResult solve_cyclic_fixed_point(const CyclicSystem& system, double tol = 1e-12,
                                          int max_sweeps = 1000);

/// Complex block Q - exp(-2*pi*i*p/N) C decoupling harmonic p of the cyclic
/// system under the unitary DFT.
SparseMatrixC harmonic_block(const CyclicSystem& system, int harmonic_index);

struct MultiharmonicOptions {
  /// Exploit conjugate symmetry of real data: factor and solve only bins
  /// 0 .. N/2 and mirror the rest.  Disable to solve every bin independently
  /// (verification mode).
  bool use_conjugate_symmetry = true;
  int workers = 1;
};

/// Frequency-domain solver for the cyclic system: diagonalizes the block
/// circulant with the DFT, solves the decoupled harmonic blocks (one complex
/// sparse LU each, solved concurrently when workers > 1), and transforms
/// back.  Factorizations are computed once at construction and reused across
/// solves with different right-hand sides.
class MultiharmonicCyclicSolver {
 public:
  MultiharmonicCyclicSolver(const CyclicSystem& system, MultiharmonicOptions options = {});

  PeriodicTrajectory solve(const std::vector<StateVector>& rhs) const;

  int blocks() const { return blocks_; }
  const MultiharmonicOptions& options() const { return options_; }

 private:
  using ComplexLU = Eigen::SparseLU<SparseMatrixC>;

  int blocks_;
  int dim_;
  double period_;
  MultiharmonicOptions options_;
  std::vector<std::shared_ptr<ComplexLU>> factors_;  ///< per bin; null for mirrored bins
};

/// One-shot convenience wrapper: builds the solver and solves system.rhs.
PeriodicTrajectory solve_cyclic_multiharmonic(const CyclicSystem& system,
                                              const MultiharmonicOptions& options = {});

}  // namespace parasteady
