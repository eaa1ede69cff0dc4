#pragma once

#include "parasteady/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace parasteady {

/// One sinusoidal right-hand-side term amplitude*sin(2*pi*f*t + phase)*pattern.
struct ExcitationTerm {
  StateVector pattern;
  double amplitude = 0.0;
  double frequency_hz = 0.0;
  double phase_rad = 0.0;
};

/// T-periodic excitation built from sinusoidal terms.  Every frequency must
/// be an integer multiple of 1/T; evaluation reduces t into [0, T) first so
/// f(t) == f(t + T) holds to machine precision for arbitrary t.
class Excitation {
 public:
  Excitation(std::vector<ExcitationTerm> terms, double period, int dim);

  StateVector operator()(double t) const;

  double period() const { return period_; }
  int dim() const { return dim_; }
  const std::vector<ExcitationTerm>& terms() const { return terms_; }

 private:
  std::vector<ExcitationTerm> terms_;
  double period_;
  int dim_;
};

/// Scalar magnetic reluctivity as a function of B^2.  Either constant (linear
/// material) or the Brauer exponential fit nu(B^2) = k1*exp(k2*B^2) + k3.
/// The Brauer curve is capped at the vacuum reluctivity: no material is less
/// permeable than free space, and the cap keeps Newton iterates with wildly
/// overshooting field magnitudes finite.
class ReluctivityCurve {
 public:
  static ReluctivityCurve constant(double nu);
  static ReluctivityCurve brauer(double k1, double k2, double k3);

  double nu(double b_squared) const;
  /// d(nu)/d(B^2); identically zero for constant curves and in the capped
  /// saturation region.
  double nu_prime(double b_squared) const;
  bool is_constant() const { return constant_; }

 private:
  ReluctivityCurve() = default;
  bool constant_ = true;
  double nu_const_ = 0.0;
  double k1_ = 0.0, k2_ = 0.0, k3_ = 0.0;
};

/// Vacuum reluctivity 1/mu_0 [m/H].
inline constexpr double kVacuumReluctivity = 1.0 / (4.0e-7 * 3.14159265358979323846);

/// Time-periodic differential-algebraic problem
///
///   M du/dt + K(u) u = f(t),   u(0) = u(T),
///
/// with M symmetric positive semidefinite (possibly singular), K(u) symmetric
/// positive definite for every argument and exactly T-periodic f.  Linear
/// problems carry a constant stiffness matrix; nonlinear ones carry assembly
/// callbacks for K(u) and for the Newton system matrix d/du [K(u) u].
/// Instances are immutable after construction and safe to share across
/// threads.
class PeriodicProblem {
 public:
  using MatrixFn = std::function<SparseMatrix(const StateVector&)>;

  PeriodicProblem(SparseMatrix mass, SparseMatrix stiffness, Excitation excitation);
  PeriodicProblem(SparseMatrix mass, MatrixFn stiffness, MatrixFn newton_matrix,
                  Excitation excitation);

  int dim() const { return dim_; }
  double period() const { return excitation_.period(); }
  bool linear() const { return linear_; }

  const SparseMatrix& mass() const { return mass_; }
  /// Constant stiffness of a linear problem; throws for nonlinear problems.
  const SparseMatrix& linear_stiffness() const;
  SparseMatrix stiffness_at(const StateVector& u) const;
  /// Jacobian d/du [K(u) u]; coincides with K for linear problems.
  SparseMatrix newton_matrix_at(const StateVector& u) const;

  const Excitation& excitation() const { return excitation_; }

 private:
  int dim_;
  bool linear_;
  SparseMatrix mass_;
  SparseMatrix stiffness_;
  MatrixFn stiffness_fn_;
  MatrixFn newton_fn_;
  Excitation excitation_;
};

/// Samples the right-hand side f(t).
StateVector eval_excitation(const PeriodicProblem& problem, double t);

/// One-unknown linear model m*du/dt + k*u = amplitude*sin(2*pi*frequency*t).
/// m = 0 gives a purely algebraic equation; m = 0 together with k <= 0 is
/// rejected as degenerate.
PeriodicProblem build_scalar_test(double m, double k, double amplitude, double frequency_hz);

/// Two-unknown pair coupling one differential and one algebraic equation:
/// M = diag(1, 0), K = [[2, -1], [-1, 2]], f(t) = (sin(2*pi*50*t), 0).
/// The singular mass makes this the smallest genuine DAE in the suite.
PeriodicProblem build_dae_pair();

/// Parameters of the built-in 1D axisymmetric coaxial cable model: a solid
/// conducting wire (region 0, carries the imposed source current density),
/// a magnetic sleeve (region 1, Brauer reluctivity unless linear_sleeve),
/// and a non-conducting shield (region 2) with A = 0 at the outer radius.
struct CoaxCableParams {
  int n_r = 200;               ///< radial nodes including r = 0 and r = r3
  double r1 = 2.0e-3;          ///< wire outer radius [m]
  double r2 = 3.5e-3;          ///< sleeve outer radius [m]
  double r3 = 5.0e-3;          ///< shield outer radius = Dirichlet boundary [m]
  double sigma_wire = 5.96e7;  ///< conductivities [S/m]
  double sigma_sleeve = 5.0e6;
  double sigma_shield = 0.0;
  double brauer_k1 = 49.4;     ///< sleeve Brauer fit nu = k1*exp(k2*B^2) + k3
  double brauer_k2 = 1.46;
  double brauer_k3 = 520.6;
  bool linear_sleeve = false;  ///< freeze the sleeve at nu(0) = k1 + k3
  int source_region = 0;       ///< region carrying the imposed current
  double current = 100.0;      ///< source current amplitude [A]
  double frequency_hz = 50.0;
};

/// Builds the coaxial cable model on a uniform radial mesh with n_r nodes.
/// Unknowns are the azimuthal vector potential at nodes 0 .. n_r-2 (the node
/// at r3 is eliminated by the Dirichlet condition), so dim = n_r - 1.  The
/// source current is distributed uniformly over the source region's cross
/// section; the assembled load vector sums to the total current exactly.
PeriodicProblem build_coax_cable(const CoaxCableParams& params = {});

/// Parses an excitation description of the form
///   {"period": T, "terms": [{"amplitude": a, "frequency": f, "phase": p,
///                            "dofs": [..], "values": [..]}, ...]}
/// into an Excitation of the given dimension.  "phase" is optional (0);
/// "dofs"/"values" place the term's spatial pattern sparsely.
Excitation parse_excitation_text(const std::string& json_text, int dim);

/// Loads a linear problem from two Matrix Market files and an excitation
/// JSON file.  Rejects dimension mismatches and an asymmetric mass matrix.
PeriodicProblem load_problem(const std::string& mass_path, const std::string& stiffness_path,
                             const std::string& excitation_path);

}  // namespace parasteady
