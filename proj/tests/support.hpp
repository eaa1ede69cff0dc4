#pragma once

// Deterministic generators and dense reference helpers shared by the test
// binaries.  Everything is seeded explicitly so failures reproduce.

#include "parasteady/problem.hpp"
#include "parasteady/spectral.hpp"
#include "parasteady/types.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

namespace test_support {

using parasteady::SparseMatrix;
using parasteady::StateVector;

inline Eigen::MatrixXd random_dense(int rows, int cols, std::mt19937& gen) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = dist(gen);
  return m;
}

/// Symmetric positive definite with eigenvalues bounded away from zero.
inline SparseMatrix random_spd(int d, std::mt19937& gen) {
  const Eigen::MatrixXd a = random_dense(d, d, gen);
  const Eigen::MatrixXd s =
      a * a.transpose() / d + 0.5 * Eigen::MatrixXd::Identity(d, d);
  return s.sparseView();
}

/// Symmetric positive semidefinite with the given rank deficiency.
inline SparseMatrix random_psd_singular(int d, int rank, std::mt19937& gen) {
  const Eigen::MatrixXd b = random_dense(rank, d, gen);
  const Eigen::MatrixXd s = b.transpose() * b / d;
  return s.sparseView();
}

/// Random linear periodic problem with singular mass and a few harmonics.
inline parasteady::PeriodicProblem random_linear_problem(int d, double period,
                                                         std::mt19937& gen) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  SparseMatrix mass = random_psd_singular(d, std::max(1, d / 2), gen);
  SparseMatrix stiffness = random_spd(d, gen);
  std::vector<parasteady::ExcitationTerm> terms;
  for (int h = 1; h <= 2; ++h) {
    parasteady::ExcitationTerm term;
    term.pattern = StateVector::NullaryExpr(d, [&](Eigen::Index) { return dist(gen); });
    term.amplitude = 1.0 + 0.5 * h;
    term.frequency_hz = h / period;
    term.phase_rad = 0.4 * h;
    terms.push_back(term);
  }
  return parasteady::PeriodicProblem(std::move(mass), std::move(stiffness),
                                     parasteady::Excitation(std::move(terms), period, d));
}

/// Steady-state amplitude of m u' + k u = a sin(w t).
inline double scalar_steady_amplitude(double m, double k, double a, double omega) {
  return a / std::hypot(k, m * omega);
}

/// Unitary DFT matrix F with F(p, n) = exp(-2*pi*i*p*n/N)/sqrt(N).
inline Eigen::MatrixXcd dft_matrix(int n) {
  Eigen::MatrixXcd f(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      f(p, q) = scale * std::exp(std::complex<double>(0.0, -2.0 * M_PI * p * q / n));
  return f;
}

/// Dense (N*d) x (N*d) matrix of the block-cyclic system.
inline Eigen::MatrixXd dense_cyclic_matrix(const parasteady::CyclicSystem& sys) {
  const int n = sys.blocks;
  const int d = static_cast<int>(sys.q.rows());
  const Eigen::MatrixXd q = Eigen::MatrixXd(sys.q);
  const Eigen::MatrixXd c = Eigen::MatrixXd(sys.c);
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(n * d, n * d);
  for (int row = 0; row < n; ++row) {
    big.block(row * d, row * d, d, d) = q;
    big.block(row * d, ((row + n - 1) % n) * d, d, d) = -c;
  }
  return big;
}

inline double max_state_distance(const std::vector<StateVector>& a,
                                 const std::vector<StateVector>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, (a[i] - b[i]).norm());
  return m;
}

}  // namespace test_support
