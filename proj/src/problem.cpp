#include "parasteady/problem.hpp"

#include "parasteady/matrix_market.hpp"

#include <json.hpp>

#include <array>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <utility>

namespace parasteady {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Relative asymmetry ||A - A^T||_max / max(1, ||A||_max).
double relative_asymmetry(const SparseMatrix& a) {
  SparseMatrix diff = SparseMatrix(a.transpose()) - a;
  double scale = 1.0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it)
      scale = std::max(scale, std::abs(it.value()));
  double asym = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it)
      asym = std::max(asym, std::abs(it.value()));
  return asym / scale;
}

}  // namespace

Excitation::Excitation(std::vector<ExcitationTerm> terms, double period, int dim)
    : terms_(std::move(terms)), period_(period), dim_(dim) {
  if (!(period_ > 0.0)) throw std::runtime_error("problem: excitation period must be positive");
  if (dim_ < 1) throw std::runtime_error("problem: excitation dimension must be positive");
  for (const auto& term : terms_) {
    if (term.pattern.size() != dim_)
      throw std::runtime_error("problem: excitation pattern dimension mismatch");
    if (!(term.frequency_hz > 0.0))
      throw std::runtime_error("problem: excitation frequency must be positive");
    const double cycles = term.frequency_hz * period_;
    if (std::abs(cycles - std::round(cycles)) > 1e-9 * std::max(1.0, cycles))
      throw std::runtime_error(
          "problem: excitation frequency is not an integer multiple of 1/period");
  }
}

StateVector Excitation::operator()(double t) const {
  // Reduce into [0, T).  fmod is exact, so the reduction keeps f periodic to
  // machine precision even far outside the base period.
  double tau = std::fmod(t, period_);
  if (tau < 0.0) tau += period_;
  StateVector f = StateVector::Zero(dim_);
  for (const auto& term : terms_) {
    const double arg = 2.0 * kPi * term.frequency_hz * tau + term.phase_rad;
    f += term.amplitude * std::sin(arg) * term.pattern;
  }
  return f;
}

ReluctivityCurve ReluctivityCurve::constant(double nu) {
  if (!(nu > 0.0)) throw std::runtime_error("problem: reluctivity must be positive");
  ReluctivityCurve c;
  c.constant_ = true;
  c.nu_const_ = nu;
  return c;
}

ReluctivityCurve ReluctivityCurve::brauer(double k1, double k2, double k3) {
  if (!(k1 > 0.0) || !(k2 > 0.0) || !(k3 > 0.0))
    throw std::runtime_error("problem: Brauer coefficients must be positive");
  ReluctivityCurve c;
  c.constant_ = false;
  c.k1_ = k1;
  c.k2_ = k2;
  c.k3_ = k3;
  return c;
}

double ReluctivityCurve::nu(double b_squared) const {
  if (constant_) return nu_const_;
  // exp(k2*B^2) overflows long before the curve reaches the vacuum cap; clamp
  // the exponent so overshooting Newton iterates stay finite.
  const double expo = std::min(k2_ * b_squared, 700.0);
  return std::min(k1_ * std::exp(expo) + k3_, kVacuumReluctivity);
}

double ReluctivityCurve::nu_prime(double b_squared) const {
  if (constant_) return 0.0;
  const double expo = std::min(k2_ * b_squared, 700.0);
  const double uncapped = k1_ * std::exp(expo) + k3_;
  if (uncapped >= kVacuumReluctivity) return 0.0;
  return k1_ * k2_ * std::exp(expo);
}

PeriodicProblem::PeriodicProblem(SparseMatrix mass, SparseMatrix stiffness, Excitation excitation)
    : dim_(excitation.dim()),
      linear_(true),
      mass_(std::move(mass)),
      stiffness_(std::move(stiffness)),
      excitation_(std::move(excitation)) {
  if (mass_.rows() != dim_ || mass_.cols() != dim_ || stiffness_.rows() != dim_ ||
      stiffness_.cols() != dim_)
    throw std::runtime_error("problem: matrix dimensions do not match the excitation");
  if (relative_asymmetry(mass_) > 1e-12)
    throw std::runtime_error("problem: mass matrix is not symmetric");
  if (relative_asymmetry(stiffness_) > 1e-12)
    throw std::runtime_error("problem: stiffness matrix is not symmetric");
}

PeriodicProblem::PeriodicProblem(SparseMatrix mass, MatrixFn stiffness, MatrixFn newton_matrix,
                                 Excitation excitation)
    : dim_(excitation.dim()),
      linear_(false),
      mass_(std::move(mass)),
      stiffness_fn_(std::move(stiffness)),
      newton_fn_(std::move(newton_matrix)),
      excitation_(std::move(excitation)) {
  if (mass_.rows() != dim_ || mass_.cols() != dim_)
    throw std::runtime_error("problem: matrix dimensions do not match the excitation");
  if (relative_asymmetry(mass_) > 1e-12)
    throw std::runtime_error("problem: mass matrix is not symmetric");
  if (!stiffness_fn_ || !newton_fn_)
    throw std::runtime_error("problem: nonlinear problem needs stiffness and Newton callbacks");
}

const SparseMatrix& PeriodicProblem::linear_stiffness() const {
  if (!linear_) throw std::runtime_error("problem: nonlinear problem has no constant stiffness");
  return stiffness_;
}

SparseMatrix PeriodicProblem::stiffness_at(const StateVector& u) const {
  if (u.size() != dim_) throw std::runtime_error("problem: state dimension mismatch");
  return linear_ ? stiffness_ : stiffness_fn_(u);
}

SparseMatrix PeriodicProblem::newton_matrix_at(const StateVector& u) const {
  if (u.size() != dim_) throw std::runtime_error("problem: state dimension mismatch");
  return linear_ ? stiffness_ : newton_fn_(u);
}

StateVector eval_excitation(const PeriodicProblem& problem, double t) {
  return problem.excitation()(t);
}

PeriodicProblem build_scalar_test(double m, double k, double amplitude, double frequency_hz) {
  if (m < 0.0) throw std::runtime_error("problem: scalar mass must be non-negative");
  if (m == 0.0 && k <= 0.0) throw std::runtime_error("problem: degenerate scalar system");
  if (!(frequency_hz > 0.0)) throw std::runtime_error("problem: frequency must be positive");

  SparseMatrix mass(1, 1), stiffness(1, 1);
  if (m != 0.0) mass.insert(0, 0) = m;
  stiffness.insert(0, 0) = k;
  mass.makeCompressed();
  stiffness.makeCompressed();

  ExcitationTerm term;
  term.pattern = StateVector::Ones(1);
  term.amplitude = amplitude;
  term.frequency_hz = frequency_hz;
  std::vector<ExcitationTerm> terms;
  if (amplitude != 0.0) terms.push_back(term);
  return PeriodicProblem(std::move(mass), std::move(stiffness),
                         Excitation(std::move(terms), 1.0 / frequency_hz, 1));
}

PeriodicProblem build_dae_pair() {
  SparseMatrix mass(2, 2), stiffness(2, 2);
  mass.insert(0, 0) = 1.0;
  stiffness.insert(0, 0) = 2.0;
  stiffness.insert(0, 1) = -1.0;
  stiffness.insert(1, 0) = -1.0;
  stiffness.insert(1, 1) = 2.0;
  mass.makeCompressed();
  stiffness.makeCompressed();

  ExcitationTerm term;
  term.pattern = StateVector::Zero(2);
  term.pattern(0) = 1.0;
  term.amplitude = 1.0;
  term.frequency_hz = 50.0;
  return PeriodicProblem(std::move(mass), std::move(stiffness),
                         Excitation({term}, 1.0 / 50.0, 2));
}

namespace {

/// Mesh-and-material data of the coaxial cable shared by the assembly
/// closures.  Element e spans [r_e, r_{e+1}]; the unknowns are nodal values
/// of the vector potential at nodes 0 .. n_r-2 (node n_r-1 is Dirichlet).
struct CableGrid {
  std::vector<double> radii;
  std::vector<double> sigma;             // per element
  std::vector<ReluctivityCurve> curve;   // per element
  int dim = 0;
  double h = 0.0;

  /// Stiffness with per-element weights w_e: K = sum_e w_e * 2*pi*rbar_e/h *
  /// [[1,-1],[-1,1]], rows/cols at the Dirichlet node dropped.
  SparseMatrix weighted_stiffness(const std::vector<double>& w) const {
    std::vector<Triplet> trips;
    trips.reserve(4 * w.size());
    const int n_elems = static_cast<int>(w.size());
    for (int e = 0; e < n_elems; ++e) {
      const double rbar = 0.5 * (radii[e] + radii[e + 1]);
      const double c = w[e] * 2.0 * kPi * rbar / h;
      const int a = e, b = e + 1;
      if (a < dim) trips.emplace_back(a, a, c);
      if (a < dim && b < dim) {
        trips.emplace_back(a, b, -c);
        trips.emplace_back(b, a, -c);
      }
      if (b < dim) trips.emplace_back(b, b, c);
    }
    SparseMatrix k(dim, dim);
    k.setFromTriplets(trips.begin(), trips.end());
    k.makeCompressed();
    return k;
  }

  /// Squared flux density B^2 = ((u_b - u_a)/h)^2 per element; the Dirichlet
  /// node contributes u = 0.
  std::vector<double> element_b_squared(const StateVector& u) const {
    const int n_elems = static_cast<int>(sigma.size());
    std::vector<double> b2(n_elems);
    for (int e = 0; e < n_elems; ++e) {
      const double ua = e < dim ? u(e) : 0.0;
      const double ub = e + 1 < dim ? u(e + 1) : 0.0;
      const double g = (ub - ua) / h;
      b2[e] = g * g;
    }
    return b2;
  }
};

}  // namespace

PeriodicProblem build_coax_cable(const CoaxCableParams& params) {
  if (params.n_r < 3) throw std::runtime_error("problem: cable needs at least 3 radial nodes");
  if (!(0.0 < params.r1 && params.r1 < params.r2 && params.r2 < params.r3))
    throw std::runtime_error("problem: cable radii must satisfy 0 < r1 < r2 < r3");
  if (params.sigma_wire < 0.0 || params.sigma_sleeve < 0.0 || params.sigma_shield < 0.0)
    throw std::runtime_error("problem: conductivities must be non-negative");
  if (params.source_region < 0 || params.source_region > 2)
    throw std::runtime_error("problem: source region must be 0, 1 or 2");
  if (!(params.frequency_hz > 0.0)) throw std::runtime_error("problem: frequency must be positive");

  auto grid = std::make_shared<CableGrid>();
  const int n_nodes = params.n_r;
  const int n_elems = n_nodes - 1;
  grid->dim = n_nodes - 1;
  grid->h = params.r3 / n_elems;
  grid->radii.resize(n_nodes);
  for (int i = 0; i < n_nodes; ++i) grid->radii[i] = params.r3 * i / n_elems;

  const ReluctivityCurve vacuum = ReluctivityCurve::constant(kVacuumReluctivity);
  const ReluctivityCurve sleeve =
      params.linear_sleeve
          ? ReluctivityCurve::constant(params.brauer_k1 + params.brauer_k3)
          : ReluctivityCurve::brauer(params.brauer_k1, params.brauer_k2, params.brauer_k3);

  grid->sigma.resize(n_elems);
  grid->curve.reserve(n_elems);
  std::array<double, 3> region_sigma = {params.sigma_wire, params.sigma_sleeve,
                                        params.sigma_shield};
  std::array<double, 2> region_bounds = {params.r1, params.r2};
  for (int e = 0; e < n_elems; ++e) {
    const double mid = 0.5 * (grid->radii[e] + grid->radii[e + 1]);
    const int region = mid < region_bounds[0] ? 0 : (mid < region_bounds[1] ? 1 : 2);
    grid->sigma[e] = region_sigma[region];
    grid->curve.push_back(region == 1 ? sleeve : vacuum);
  }

  // Conductivity mass 2*pi * integral sigma r phi_a phi_b dr, elementwise via
  // two-point Gauss quadrature (exact: the integrand is cubic in r).
  std::vector<Triplet> mass_trips;
  const double gauss = 1.0 / std::sqrt(3.0);
  for (int e = 0; e < n_elems; ++e) {
    if (grid->sigma[e] == 0.0) continue;
    const double ra = grid->radii[e], rb = grid->radii[e + 1];
    const double jac = 0.5 * grid->h;
    double m[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    for (double xi : {-gauss, gauss}) {
      const double r = 0.5 * (ra + rb) + 0.5 * grid->h * xi;
      const double phi[2] = {0.5 * (1.0 - xi), 0.5 * (1.0 + xi)};
      const double weight = grid->sigma[e] * 2.0 * kPi * r * jac;
      // phi[a] * phi[b] first: the same two factors for (a,b) and (b,a)
      // keep the element matrix symmetric to the last bit
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          m[a][b] += weight * (phi[a] * phi[b]);
    }
    const int idx[2] = {e, e + 1};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        if (idx[a] < grid->dim && idx[b] < grid->dim)
          mass_trips.emplace_back(idx[a], idx[b], m[a][b]);
  }
  SparseMatrix mass(grid->dim, grid->dim);
  mass.setFromTriplets(mass_trips.begin(), mass_trips.end());
  mass.makeCompressed();

  // Load vector for a unit source current: uniform current density
  // J = 1 / (pi*(rb^2 - ra^2)) over the source region, integrated exactly
  // against the hat functions, so the assembled entries sum to 1.
  const double src_a = params.source_region == 0 ? 0.0 : region_bounds[params.source_region - 1];
  const double src_b = params.source_region == 2 ? params.r3 : region_bounds[params.source_region];
  const double density = 1.0 / (kPi * (src_b * src_b - src_a * src_a));
  StateVector pattern = StateVector::Zero(grid->dim);
  for (int e = 0; e < n_elems; ++e) {
    const double ra = grid->radii[e], rb = grid->radii[e + 1];
    const double lo = std::max(ra, src_a), hi = std::min(rb, src_b);
    if (hi <= lo) continue;
    // integral over [lo, hi] of 2*pi*J*r*phi dr with linear phi: two-point
    // Gauss on the overlap is exact (quadratic integrand).
    const double jac = 0.5 * (hi - lo);
    for (double xi : {-gauss, gauss}) {
      const double r = 0.5 * (lo + hi) + jac * xi;
      const double phi_a = (rb - r) / grid->h;
      const double phi_b = (r - ra) / grid->h;
      const double w = density * 2.0 * kPi * r * jac;
      if (e < grid->dim) pattern(e) += w * phi_a;
      if (e + 1 < grid->dim) pattern(e + 1) += w * phi_b;
    }
  }

  ExcitationTerm term;
  term.pattern = pattern;
  term.amplitude = params.current;
  term.frequency_hz = params.frequency_hz;
  Excitation excitation({term}, 1.0 / params.frequency_hz, grid->dim);

  const bool all_constant = params.linear_sleeve;
  if (all_constant) {
    std::vector<double> w(n_elems);
    for (int e = 0; e < n_elems; ++e) w[e] = grid->curve[e].nu(0.0);
    return PeriodicProblem(std::move(mass), grid->weighted_stiffness(w), std::move(excitation));
  }

  auto stiffness = [grid](const StateVector& u) {
    const auto b2 = grid->element_b_squared(u);
    std::vector<double> w(b2.size());
    for (size_t e = 0; e < b2.size(); ++e) w[e] = grid->curve[e].nu(b2[e]);
    return grid->weighted_stiffness(w);
  };
  // d/du [K(u) u] elementwise: (nu + 2 B^2 nu') times the unit stiffness; the
  // chain-rule term is rank-one per element and collapses onto the same
  // [[1,-1],[-1,1]] pattern.
  auto newton_matrix = [grid](const StateVector& u) {
    const auto b2 = grid->element_b_squared(u);
    std::vector<double> w(b2.size());
    for (size_t e = 0; e < b2.size(); ++e)
      w[e] = grid->curve[e].nu(b2[e]) + 2.0 * b2[e] * grid->curve[e].nu_prime(b2[e]);
    return grid->weighted_stiffness(w);
  };
  return PeriodicProblem(std::move(mass), stiffness, newton_matrix, std::move(excitation));
}

Excitation parse_excitation_text(const std::string& json_text, int dim) {
  nlohmann::json spec;
  try {
    spec = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("problem: excitation JSON parse error: ") + e.what());
  }
  if (!spec.is_object()) throw std::runtime_error("problem: excitation spec must be an object");
  for (const auto& [key, _] : spec.items())
    if (key != "period" && key != "terms")
      throw std::runtime_error("problem: unknown excitation key \"" + key + "\"");
  if (!spec.contains("period") || !spec["period"].is_number())
    throw std::runtime_error("problem: excitation spec needs a numeric \"period\"");
  if (!spec.contains("terms") || !spec["terms"].is_array())
    throw std::runtime_error("problem: excitation spec needs a \"terms\" array");

  std::vector<ExcitationTerm> terms;
  for (const auto& t : spec["terms"]) {
    if (!t.is_object()) throw std::runtime_error("problem: excitation term must be an object");
    for (const auto& [key, _] : t.items())
      if (key != "amplitude" && key != "frequency" && key != "phase" && key != "dofs" &&
          key != "values")
        throw std::runtime_error("problem: unknown excitation term key \"" + key + "\"");
    ExcitationTerm term;
    if (!t.contains("amplitude") || !t.contains("frequency"))
      throw std::runtime_error("problem: excitation term needs amplitude and frequency");
    term.amplitude = t["amplitude"].get<double>();
    term.frequency_hz = t["frequency"].get<double>();
    term.phase_rad = t.value("phase", 0.0);
    if (!t.contains("dofs") || !t.contains("values") || !t["dofs"].is_array() ||
        !t["values"].is_array() || t["dofs"].size() != t["values"].size())
      throw std::runtime_error("problem: excitation term needs matching dofs/values arrays");
    term.pattern = StateVector::Zero(dim);
    for (size_t i = 0; i < t["dofs"].size(); ++i) {
      const int dof = t["dofs"][i].get<int>();
      if (dof < 0 || dof >= dim)
        throw std::runtime_error("problem: excitation dof index out of range");
      term.pattern(dof) = t["values"][i].get<double>();
    }
    terms.push_back(std::move(term));
  }
  return Excitation(std::move(terms), spec["period"].get<double>(), dim);
}

PeriodicProblem load_problem(const std::string& mass_path, const std::string& stiffness_path,
                             const std::string& excitation_path) {
  SparseMatrix mass = read_matrix_market(mass_path);
  SparseMatrix stiffness = read_matrix_market(stiffness_path);
  if (mass.rows() != stiffness.rows() || mass.cols() != stiffness.cols())
    throw std::runtime_error("problem: mass and stiffness dimensions do not match");
  if (mass.rows() != mass.cols()) throw std::runtime_error("problem: matrices must be square");

  std::ifstream in(excitation_path);
  if (!in) throw std::runtime_error("problem: cannot open excitation file " + excitation_path);
  std::stringstream buf;
  buf << in.rdbuf();
  Excitation excitation = parse_excitation_text(buf.str(), static_cast<int>(mass.rows()));
  return PeriodicProblem(std::move(mass), std::move(stiffness), std::move(excitation));
}

}  // namespace parasteady
