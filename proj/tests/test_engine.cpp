#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "parasteady/engine.hpp"
#include "parasteady/parallel.hpp"
#include "support.hpp"

#include <atomic>
#include <cmath>
#include <vector>

using namespace parasteady;

TEST_CASE("variant names round-trip") {
  for (SolverVariant v :
       {SolverVariant::Sequential, SolverVariant::ClassicParareal, SolverVariant::PPIC,
        SolverVariant::PPPCDirect, SolverVariant::PPPCFixedPoint,
        SolverVariant::PPPCMultiharmonic}) {
    CHECK(parse_variant(variant_name(v)) == v);
  }
  CHECK_THROWS_WITH_AS(parse_variant("speedy"), doctest::Contains("speedy"), std::runtime_error);
}

TEST_CASE("jump norm") {
  auto vec = [](double a, double b) {
    StateVector v(2);
    v << a, b;
    return v;
  };
  SUBCASE("small states measure absolutely") {
    CHECK(jump_norm({vec(1, 0)}, {vec(0, 0)}) == 1.0);
    CHECK(jump_norm({vec(0.5, 0), vec(0, 0)}, {vec(0, 0), vec(0.25, 0)}) == 0.5);
  }
  SUBCASE("large states measure relatively") {
    CHECK(jump_norm({vec(10, 0)}, {vec(8, 0)}) == doctest::Approx(0.2).epsilon(1e-14));
  }
  SUBCASE("identical lists give zero") {
    CHECK(jump_norm({vec(3, 4)}, {vec(3, 4)}) == 0.0);
  }
  SUBCASE("mismatched lists are rejected") {
    CHECK_THROWS(jump_norm({vec(1, 0)}, {}));
    CHECK_THROWS(jump_norm({}, {}));
  }
}

TEST_CASE("frozen coarse linearization") {
  SUBCASE("linear problems pass through") {
    const PeriodicProblem pair = build_dae_pair();
    const PeriodicProblem frozen = frozen_coarse_linearization(pair);
    CHECK(frozen.linear());
    CHECK((Eigen::MatrixXd(frozen.linear_stiffness()) -
           Eigen::MatrixXd(pair.linear_stiffness()))
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
  SUBCASE("nonlinear problems freeze at the reference state") {
    CoaxCableParams params;
    params.n_r = 21;
    const PeriodicProblem cable = build_coax_cable(params);

    const PeriodicProblem at_zero = frozen_coarse_linearization(cable);
    CHECK(at_zero.linear());
    CHECK((Eigen::MatrixXd(at_zero.linear_stiffness()) -
           Eigen::MatrixXd(cable.stiffness_at(StateVector::Zero(20))))
              .cwiseAbs()
              .maxCoeff() == 0.0);

    // ramp: nonzero radial gradient, so the sleeve elements see B != 0
    const StateVector ref = StateVector::LinSpaced(20, 0.0, 2e-3);
    const PeriodicProblem at_ref = frozen_coarse_linearization(cable, ref);
    CHECK((Eigen::MatrixXd(at_ref.linear_stiffness()) -
           Eigen::MatrixXd(cable.stiffness_at(ref)))
              .cwiseAbs()
              .maxCoeff() == 0.0);
    CHECK((Eigen::MatrixXd(at_zero.linear_stiffness()) -
           Eigen::MatrixXd(at_ref.linear_stiffness()))
              .cwiseAbs()
              .maxCoeff() > 0.0);

    CHECK_THROWS(frozen_coarse_linearization(cable, StateVector::Zero(7)));
  }
}

TEST_CASE("parallel_for") {
  SUBCASE("covers every index exactly once") {
    std::vector<std::atomic<int>> hits(100);
    for (auto& h : hits) h = 0;
    parallel_for(100, 4, [&](int i) { hits[static_cast<size_t>(i)]++; });
    for (const auto& h : hits) CHECK(h.load() == 1);
  }
  SUBCASE("single worker runs inline") {
    int sum = 0;
    parallel_for(5, 1, [&](int i) { sum += i; });
    CHECK(sum == 10);
  }
  SUBCASE("exceptions propagate to the caller") {
    CHECK_THROWS_WITH_AS(parallel_for(8, 3,
                                      [](int i) {
                                        if (i == 5) throw std::runtime_error("boom at 5");
                                      }),
                         doctest::Contains("boom"), std::runtime_error);
  }
}

TEST_CASE("engine settings validation") {
  const PeriodicProblem pair = build_dae_pair();
  EngineSettings s{TimeMesh(4, 2, pair.period())};
  SUBCASE("tolerance") {
    s.tol = 0.0;
    CHECK_THROWS(solve_pp_ic(pair, s));
  }
  SUBCASE("iteration budget") {
    s.max_iterations = 0;
    CHECK_THROWS(solve_pp_pc(pair, s));
  }
  SUBCASE("workers") {
    s.workers = 0;
    CHECK_THROWS(classic_parareal(pair, StateVector::Zero(2), s));
  }
  SUBCASE("initial state dimension") {
    CHECK_THROWS(classic_parareal(pair, StateVector::Zero(3), s));
  }
}

TEST_CASE("classic parareal") {
  SUBCASE("zero excitation is a fixed point") {
    const PeriodicProblem p = build_scalar_test(1.0, 1.0, 0.0, 50.0);
    EngineSettings s{TimeMesh(6, 4, p.period())};
    const InitialValueSolveResult r = classic_parareal(p, StateVector::Zero(1), s);
    CHECK(r.history.converged());
    CHECK(r.history.count() == 1);
    for (const auto& u : r.states) CHECK(u.norm() == 0.0);
  }
  SUBCASE("s = 1 converges in one iteration") {
    const PeriodicProblem pair = build_dae_pair();
    EngineSettings s{TimeMesh(6, 1, pair.period())};
    const InitialValueSolveResult r = classic_parareal(pair, StateVector::Zero(2), s);
    CHECK(r.history.converged());
    CHECK(r.history.count() == 1);
  }
  SUBCASE("terminates on the exact fine solution after at most N+1 iterations") {
    const PeriodicProblem pair = build_dae_pair();
    const TimeMesh mesh(6, 4, pair.period());
    EngineSettings s{mesh};
    s.tol = 1e-300;  // unreachable: termination must come from exact cancellation
    s.max_iterations = mesh.subintervals + 2;
    StateVector u0(2);
    u0 << 0.3, -0.2;

    const InitialValueSolveResult r = classic_parareal(pair, u0, s);
    CHECK(r.history.converged());
    CHECK(r.history.count() <= mesh.subintervals + 1);
    CHECK(r.history.iterations.back().jump == 0.0);

    // the terminal iterate is the sequential fine solution, bit for bit
    const Propagator prop(pair, mesh);
    StateVector u = u0;
    CHECK((r.states[0] - u0).norm() == 0.0);
    for (int n = 1; n <= mesh.subintervals; ++n) {
      u = prop.fine_propagate(n, u);
      CHECK((r.states[static_cast<size_t>(n)] - u).cwiseAbs().maxCoeff() == 0.0);
    }
  }
  SUBCASE("iteration records are sequential and timed") {
    const PeriodicProblem pair = build_dae_pair();
    EngineSettings s{TimeMesh(5, 3, pair.period())};
    s.tol = 1e-12;
    const InitialValueSolveResult r = classic_parareal(pair, StateVector::Zero(2), s);
    for (int k = 0; k < r.history.count(); ++k) {
      CHECK(r.history.iterations[static_cast<size_t>(k)].k == k);
      CHECK(r.history.iterations[static_cast<size_t>(k)].seconds >= 0.0);
    }
    CHECK(r.history.total_seconds + 1e-6 >=
          r.history.fine_seconds + r.history.coarse_seconds + r.history.spectral_seconds);
  }
}

TEST_CASE("periodic parareal with initial-value coarse update") {
  SUBCASE("memoryless problems converge immediately") {
    const PeriodicProblem p = build_scalar_test(0.0, 4.0, 2.0, 50.0);
    EngineSettings s{TimeMesh(8, 3, p.period())};
    s.tol = 1e-12;
    const PeriodicSolveResult r = solve_pp_ic(p, s);
    CHECK(r.history.converged());
    CHECK(r.history.count() <= 2);
    REQUIRE(r.trajectory.size() == 8);
    // the steady state of an algebraic equation is u(t) = f(t)/k
    for (int n = 0; n < 8; ++n) {
      const double expected = eval_excitation(p, s.mesh.boundary(n))(0) / 4.0;
      CHECK(r.trajectory.states[static_cast<size_t>(n)](0) ==
            doctest::Approx(expected).epsilon(1e-12));
    }
  }
  SUBCASE("iteration count tracks the transient length") {
    // decay e^(-k*T/m) = e^(-4) per period: the sequential reference needs a
    // handful of periods and PP-IC a comparable number of iterations.
    const PeriodicProblem p = build_scalar_test(5e-3, 1.0, 1.0, 50.0);
    const TimeMesh mesh(10, 5, p.period());
    EngineSettings s{mesh};
    s.tol = 1e-6;
    s.max_iterations = 2000;
    const PeriodicSolveResult r = solve_pp_ic(p, s);
    CHECK(r.history.converged());
    CHECK(r.history.final_defect <= s.tol);

    const SteadyStateResult seq = sequential_steady_state(p, mesh, s.tol, 2000);
    CHECK(seq.converged);
    CHECK(std::abs(r.history.count() - seq.periods) <= 3);

    // both land on the same periodic orbit
    CHECK(test_support::max_state_distance(r.trajectory.states, seq.trajectory.states) <=
          1e-4 * std::max(1.0, seq.trajectory.max_state_norm()));
  }
  SUBCASE("budget exhaustion reports max iterations") {
    const PeriodicProblem pair = build_dae_pair();  // lightly damped, slow relaxation
    EngineSettings s{TimeMesh(4, 2, pair.period())};
    s.tol = 1e-10;
    s.max_iterations = 3;
    const PeriodicSolveResult r = solve_pp_ic(pair, s);
    CHECK_FALSE(r.history.converged());
    CHECK(r.history.count() == 3);
  }
}

TEST_CASE("periodic parareal with periodic coarse correction") {
  const PeriodicProblem pair = build_dae_pair();
  const TimeMesh mesh(8, 5, pair.period());

  SUBCASE("all cyclic solver kinds agree and satisfy the fine fixed point") {
    EngineSettings s{mesh};
    s.tol = 1e-10;
    std::vector<PeriodicSolveResult> results;
    for (CyclicSolverKind kind :
         {CyclicSolverKind::Direct, CyclicSolverKind::FixedPoint,
          CyclicSolverKind::Multiharmonic}) {
      results.push_back(solve_pp_pc(pair, s, kind));
      CHECK(results.back().history.converged());
      REQUIRE(results.back().trajectory.size() == 8);
    }
    const double scale = std::max(1.0, results[0].trajectory.max_state_norm());
    CHECK(test_support::max_state_distance(results[0].trajectory.states,
                                           results[1].trajectory.states) <= 1e-8 * scale);
    CHECK(test_support::max_state_distance(results[0].trajectory.states,
                                           results[2].trajectory.states) <= 1e-8 * scale);
    // converged iterates are fixed points of the cyclic fine propagator
    for (const auto& r : results)
      CHECK(fine_periodicity_defect(pair, r.trajectory, mesh) <= 1e-7);

    // only the fixed-point kind reports inner sweeps
    for (const auto& rec : results[1].history.iterations) CHECK(rec.coarse_sweeps > 0);
    for (const auto& rec : results[2].history.iterations) CHECK(rec.coarse_sweeps == 0);
  }
  SUBCASE("runs are deterministic and worker-count independent") {
    EngineSettings s{mesh};
    s.tol = 1e-8;
    const PeriodicSolveResult a = solve_pp_pc(pair, s);
    const PeriodicSolveResult b = solve_pp_pc(pair, s);
    CHECK(test_support::max_state_distance(a.trajectory.states, b.trajectory.states) == 0.0);

    EngineSettings threaded = s;
    threaded.workers = 4;
    const PeriodicSolveResult c = solve_pp_pc(pair, threaded);
    CHECK(a.history.count() == c.history.count());
    CHECK(test_support::max_state_distance(a.trajectory.states, c.trajectory.states) == 0.0);

    const PeriodicSolveResult ic_a = solve_pp_ic(pair, s);
    EngineSettings ic_threaded = s;
    ic_threaded.workers = 4;
    const PeriodicSolveResult ic_b = solve_pp_ic(pair, ic_threaded);
    CHECK(test_support::max_state_distance(ic_a.trajectory.states, ic_b.trajectory.states) == 0.0);
  }
  SUBCASE("odd subinterval counts need a non-spectral cyclic solver") {
    EngineSettings s{TimeMesh(5, 3, pair.period())};
    s.tol = 1e-8;
    CHECK_THROWS_WITH_AS(solve_pp_pc(pair, s, CyclicSolverKind::Multiharmonic),
                         doctest::Contains("even number of blocks"), std::runtime_error);
    const PeriodicSolveResult r = solve_pp_pc(pair, s, CyclicSolverKind::Direct);
    CHECK(r.history.converged());
  }
  SUBCASE("an exhausted inner fixed-point budget is an error") {
    EngineSettings s{mesh};
    s.fixed_point_max_sweeps = 1;
    CHECK_THROWS_WITH_AS(solve_pp_pc(pair, s, CyclicSolverKind::FixedPoint),
                         doctest::Contains("fixed-point"), std::runtime_error);
  }
}

TEST_CASE("periodic coarse correction on a nonlinear problem") {
  CoaxCableParams params;
  params.n_r = 41;
  const PeriodicProblem cable = build_coax_cable(params);
  const TimeMesh mesh(4, 10, cable.period());
  EngineSettings s{mesh};
  s.tol = 1e-8;
  s.max_iterations = 10;

  const PeriodicSolveResult r = solve_pp_pc(cable, s);
  CHECK(r.history.converged());
  CHECK(r.history.count() <= 10);
  CHECK(fine_periodicity_defect(cable, r.trajectory, mesh) <= 1e-5);

  SUBCASE("jumps contract monotonically after the first iteration") {
    for (int k = 2; k < r.history.count(); ++k)
      CHECK(r.history.iterations[static_cast<size_t>(k)].jump <
            r.history.iterations[static_cast<size_t>(k - 1)].jump);
  }
  SUBCASE("a frozen reference away from zero converges to the same orbit") {
    EngineSettings shifted = s;
    shifted.frozen_reference = r.trajectory.states[0];
    const PeriodicSolveResult r2 = solve_pp_pc(cable, shifted);
    CHECK(r2.history.converged());
    CHECK(test_support::max_state_distance(r.trajectory.states, r2.trajectory.states) <=
          1e-6 * std::max(1.0, r.trajectory.max_state_norm()));
  }
}

TEST_CASE("fine periodicity defect") {
  SUBCASE("vanishes on the discrete periodic solution") {
    const PeriodicProblem p = build_scalar_test(0.0, 4.0, 2.0, 50.0);
    const TimeMesh mesh(6, 2, p.period());
    const SteadyStateResult seq = sequential_steady_state(p, mesh, 1e-12, 3);
    REQUIRE(seq.converged);
    CHECK(fine_periodicity_defect(p, seq.trajectory, mesh) <= 1e-13);
  }
  SUBCASE("is large for an arbitrary trajectory") {
    const PeriodicProblem pair = build_dae_pair();
    const TimeMesh mesh(4, 2, pair.period());
    PeriodicTrajectory junk;
    junk.period = mesh.period;
    junk.states.assign(4, StateVector::Constant(2, 0.7));
    CHECK(fine_periodicity_defect(pair, junk, mesh) > 1e-3);
  }
  SUBCASE("trajectory length must match the mesh") {
    const PeriodicProblem pair = build_dae_pair();
    PeriodicTrajectory junk;
    junk.period = pair.period();
    junk.states.assign(3, StateVector::Zero(2));
    CHECK_THROWS(fine_periodicity_defect(pair, junk, TimeMesh(4, 2, pair.period())));
  }
}
