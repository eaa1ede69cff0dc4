#include "parasteady/spectral.hpp"

#include "parasteady/parallel.hpp"

#include <Eigen/SparseCholesky>
#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <sstream>
#include <utility>

namespace parasteady {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Largest imaginary residue tolerated (relative to the real part) when a
/// spectrum is transformed back to real states.
constexpr double kImagResidualTol = 1e-8;

/// FFTW plan creation/destruction is not thread safe; executions are.
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

/// In-place unitary DFT across the list index of d-dimensional complex
/// vectors (one transform per component, batched).  sign is FFTW_FORWARD or
/// FFTW_BACKWARD; both directions scale by N^{-1/2}.
std::vector<Eigen::VectorXcd> dft_bins(const std::vector<Eigen::VectorXcd>& input, int sign) {
  const int n = static_cast<int>(input.size());
  const int d = static_cast<int>(input.front().size());
  std::vector<std::complex<double>> buf(static_cast<size_t>(n) * d);
  for (int k = 0; k < n; ++k) {
    if (input[k].size() != d) throw std::runtime_error("spectral: ragged state list");
    for (int j = 0; j < d; ++j) buf[static_cast<size_t>(k) * d + j] = input[k](j);
  }

  auto* data = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    int size = n;
    plan = fftw_plan_many_dft(1, &size, d, data, nullptr, d, 1, data, nullptr, d, 1, sign,
                              FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw std::runtime_error("spectral: FFTW plan creation failed");
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(plan);
  }

  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<Eigen::VectorXcd> out(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    out[k].resize(d);
    for (int j = 0; j < d; ++j) out[k](j) = scale * buf[static_cast<size_t>(k) * d + j];
  }
  return out;
}

std::vector<Eigen::VectorXcd> to_complex(const std::vector<StateVector>& states) {
  std::vector<Eigen::VectorXcd> out(states.size());
  for (size_t k = 0; k < states.size(); ++k) out[k] = states[k].cast<std::complex<double>>();
  return out;
}

/// Drops negligible imaginary parts; throws if they are not negligible.
std::vector<StateVector> realify(const std::vector<Eigen::VectorXcd>& bins) {
  double real_max = 0.0, imag_max = 0.0;
  for (const auto& v : bins) {
    real_max = std::max(real_max, v.real().cwiseAbs().maxCoeff());
    imag_max = std::max(imag_max, v.imag().cwiseAbs().maxCoeff());
  }
  if (imag_max > kImagResidualTol * std::max(1.0, real_max))
    throw std::runtime_error("spectral: conjugate symmetry violated (imaginary residue " +
                             std::to_string(imag_max) + ")");
  std::vector<StateVector> out(bins.size());
  for (size_t k = 0; k < bins.size(); ++k) out[k] = bins[k].real();
  return out;
}

void require_even_blocks(int n, const char* where) {
  if (n < 2 || n % 2 != 0)
    throw std::runtime_error(std::string("spectral: ") + where +
                             " requires an even number of blocks >= 2, got " + std::to_string(n));
}

}  // namespace

std::vector<Harmonic> frequency_set(int n_blocks, double period) {
  require_even_blocks(n_blocks, "frequency_set");
  if (!(period > 0.0)) throw std::runtime_error("spectral: period must be positive");
  std::vector<Harmonic> set(static_cast<size_t>(n_blocks));
  for (int b = 0; b < n_blocks; ++b) {
    const int index = b <= n_blocks / 2 ? b : b - n_blocks;
    set[b] = Harmonic{index, 2.0 * kPi * index / period};
  }
  return set;
}

std::vector<Eigen::VectorXcd> forward_dft(const PeriodicTrajectory& trajectory) {
  require_even_blocks(trajectory.size(), "forward_dft");
  return dft_bins(to_complex(trajectory.states), FFTW_FORWARD);
}

PeriodicTrajectory inverse_dft(const std::vector<Eigen::VectorXcd>& spectrum, double period) {
  require_even_blocks(static_cast<int>(spectrum.size()), "inverse_dft");
  PeriodicTrajectory traj;
  traj.period = period;
  traj.states = realify(dft_bins(spectrum, FFTW_BACKWARD));
  return traj;
}

CyclicSystem make_cyclic_system(const PeriodicProblem& problem, const TimeMesh& mesh) {
  if (!problem.linear())
    throw std::runtime_error(
        "spectral: cyclic system requires a linear problem (freeze the coarse operator first)");
  if (problem.period() != mesh.period)
    throw std::runtime_error("spectral: mesh period does not match the problem");
  CyclicSystem sys;
  sys.blocks = mesh.subintervals;
  sys.period = mesh.period;
  sys.c = problem.mass() / mesh.coarse_dt();
  sys.q = sys.c + problem.linear_stiffness();
  sys.c.makeCompressed();
  sys.q.makeCompressed();
  return sys;
}

std::vector<StateVector> assemble_rhs(const std::vector<StateVector>& fine,
                                      const std::vector<StateVector>& coarse,
                                      const CyclicSystem& system, const PeriodicProblem& problem,
                                      const TimeMesh& mesh) {
  const int n = system.blocks;
  if (static_cast<int>(fine.size()) != n || static_cast<int>(coarse.size()) != n)
    throw std::runtime_error("spectral: endpoint list length does not match the block count");

  std::vector<StateVector> rhs(static_cast<size_t>(n));
  for (int row = 0; row < n; ++row) {
    // Row 0 is the periodic wrap: it receives the jump of subinterval N.
    const int sub = row == 0 ? n : row;
    const StateVector jump = fine[sub - 1] - coarse[sub - 1];
    rhs[row] = system.q * jump + eval_excitation(problem, mesh.boundary(sub));
  }
  return rhs;
}

PeriodicTrajectory solve_cyclic_direct(const CyclicSystem& system) {
  const int n = system.blocks;
  const int d = static_cast<int>(system.q.rows());
  if (static_cast<int>(system.rhs.size()) != n)
    throw std::runtime_error("spectral: cyclic system has no assembled right-hand side");

  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(n) * (system.q.nonZeros() + system.c.nonZeros()));
  for (int row = 0; row < n; ++row) {
    const int prev = (row + n - 1) % n;
    for (int k = 0; k < system.q.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(system.q, k); it; ++it)
        trips.emplace_back(row * d + static_cast<int>(it.row()),
                           row * d + static_cast<int>(it.col()), it.value());
    for (int k = 0; k < system.c.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(system.c, k); it; ++it)
        trips.emplace_back(row * d + static_cast<int>(it.row()),
                           prev * d + static_cast<int>(it.col()), -it.value());
  }
  SparseMatrix big(n * d, n * d);
  big.setFromTriplets(trips.begin(), trips.end());
  big.makeCompressed();

  Eigen::SparseLU<SparseMatrix> lu(big);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("spectral: cyclic system factorization failed");
  StateVector stacked(n * d);
  for (int row = 0; row < n; ++row) stacked.segment(row * d, d) = system.rhs[row];
  const StateVector solution = lu.solve(stacked);
  if (!solution.allFinite()) throw std::runtime_error("spectral: cyclic system is singular");

  PeriodicTrajectory traj;
  traj.period = system.period;
  traj.states.resize(static_cast<size_t>(n));
  for (int row = 0; row < n; ++row) traj.states[row] = solution.segment(row * d, d);
  return traj;
}

FixedPointResult solve_cyclic_fixed_point(const CyclicSystem& system, double tol, int max_sweeps) {
  const int n = system.blocks;
  const int d = static_cast<int>(system.q.rows());
  if (static_cast<int>(system.rhs.size()) != n)
    throw std::runtime_error("spectral: cyclic system has no assembled right-hand side");
  if (!(tol > 0.0)) throw std::runtime_error("spectral: tolerance must be positive");

  Eigen::SimplicialLDLT<SparseMatrix> q_factor(system.q);
  if (q_factor.info() != Eigen::Success)
    throw std::runtime_error("spectral: diagonal block factorization failed");

  FixedPointResult result;
  result.trajectory.period = system.period;
  auto& u = result.trajectory.states;
  u.assign(static_cast<size_t>(n), StateVector::Zero(d));
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    double change = 0.0, scale = 1.0;
    for (int row = 0; row < n; ++row) {
      const StateVector& prev = u[(row + n - 1) % n];
      StateVector next = q_factor.solve(system.rhs[row] + system.c * prev);
      if (!next.allFinite()) throw std::runtime_error("spectral: fixed-point sweep diverged");
      change = std::max(change, (next - u[row]).norm());
      u[row] = std::move(next);
      scale = std::max(scale, u[row].norm());
    }
    result.sweeps = sweep;
    if (change <= tol * scale) {
      result.converged = true;
      break;
    }
  }
  return result;
}

SparseMatrixC harmonic_block(const CyclicSystem& system, int harmonic_index) {
  const std::complex<double> phase =
      std::exp(std::complex<double>(0.0, -2.0 * kPi * harmonic_index / system.blocks));
  SparseMatrixC block =
      system.q.cast<std::complex<double>>() - phase * system.c.cast<std::complex<double>>();
  block.makeCompressed();
  return block;
}

MultiharmonicCyclicSolver::MultiharmonicCyclicSolver(const CyclicSystem& system,
                                                     MultiharmonicOptions options)
    : blocks_(system.blocks),
      dim_(static_cast<int>(system.q.rows())),
      period_(system.period),
      options_(options) {
  require_even_blocks(blocks_, "multiharmonic solve");
  if (options_.workers < 1) throw std::runtime_error("spectral: worker count must be >= 1");

  const auto harmonics = frequency_set(blocks_, period_);
  const int last = options_.use_conjugate_symmetry ? blocks_ / 2 : blocks_ - 1;
  factors_.resize(static_cast<size_t>(blocks_));
  parallel_for(last + 1, options_.workers, [&](int bin) {
    auto lu = std::make_shared<ComplexLU>();
    lu->compute(harmonic_block(system, harmonics[bin].index));
    if (lu->info() != Eigen::Success) {
      std::ostringstream msg;
      msg << "spectral: harmonic block p = " << harmonics[bin].index << " is singular";
      throw std::runtime_error(msg.str());
    }
    factors_[bin] = std::move(lu);
  });
}

PeriodicTrajectory MultiharmonicCyclicSolver::solve(const std::vector<StateVector>& rhs) const {
  if (static_cast<int>(rhs.size()) != blocks_)
    throw std::runtime_error("spectral: right-hand side block count mismatch");

  const auto rhs_hat = dft_bins(to_complex(rhs), FFTW_FORWARD);
  std::vector<Eigen::VectorXcd> solution_hat(static_cast<size_t>(blocks_));
  const int last = options_.use_conjugate_symmetry ? blocks_ / 2 : blocks_ - 1;
  parallel_for(last + 1, options_.workers, [&](int bin) {
    solution_hat[bin] = factors_[bin]->solve(rhs_hat[bin]);
    if (!solution_hat[bin].allFinite())
      throw std::runtime_error("spectral: harmonic solve produced non-finite values");
  });
  if (options_.use_conjugate_symmetry) {
    // Real data: bin N-b is the conjugate of bin b.
    for (int bin = blocks_ / 2 + 1; bin < blocks_; ++bin)
      solution_hat[bin] = solution_hat[blocks_ - bin].conjugate();
  }

  PeriodicTrajectory traj;
  traj.period = period_;
  traj.states = realify(dft_bins(solution_hat, FFTW_BACKWARD));
  return traj;
}

PeriodicTrajectory solve_cyclic_multiharmonic(const CyclicSystem& system,
                                              const MultiharmonicOptions& options) {
  MultiharmonicCyclicSolver solver(system, options);
  return solver.solve(system.rhs);
}

}  // namespace parasteady
