#include <cmath>

#include "common.hpp"
#include "doctest.h"
#include "jflow/cone.hpp"
#include "jflow/flow.hpp"
#include "jflow/functionals.hpp"
#include "jflow/stationary.hpp"

using namespace jflow;

namespace {

GeometrySetup named_setup(const std::string& name, int points) {
  ScenarioSpec spec = named_scenario(name);
  spec.points = points;
  if (spec.target == ConeClass::kBoundary) return calibrate_boundary_scenario(spec).setup;
  return build_scenario(spec);
}

// With constant omega the flat-torus solution is minus the sum of the
// provenance potentials, up to a constant.
ScalarField flat_oracle(const GeometrySetup& setup) {
  const auto& a = setup.chi().provenance();
  const auto& b = setup.chi_tilde().provenance();
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  ScalarField eta = *a->potential + *b->potential;
  ScalarField psi = eta * -1.0;
  return psi + (-psi.max());
}

}  // namespace

TEST_SUITE("stationary") {
  TEST_CASE("trivial setup needs no iterations") {
    const GeometrySetup setup = named_setup("trivial", 8);
    const EllipticSolution sol = solve_elliptic(setup, ScalarField(setup.grid()));
    CHECK(sol.newton_iterations == 0);
    CHECK(sol.residual_norm < 1e-14);
    CHECK(testing::sup_norm(sol.psi.data()) == 0.0);
  }

  TEST_CASE("strict solution matches the potential oracle") {
    const GeometrySetup setup = named_setup("strict", 32);
    const EllipticSolution sol = solve_elliptic(setup, ScalarField(setup.grid()));
    CHECK(sol.residual_norm < 1e-10);
    CHECK(sol.psi.max() == 0.0);
    CHECK(testing::sup_norm((sol.psi - flat_oracle(setup)).data()) < 1e-9);
    for (double mean : sol.increment_means) CHECK(std::abs(mean) < 1e-12);

    // Quadratic tail, ignoring residuals at the round-off floor.
    std::vector<double> logs;
    for (double r : sol.residual_history)
      if (r > 1e-12) logs.push_back(std::log(r));
    REQUIRE(logs.size() >= 4);
    for (std::size_t k = logs.size() - 2; k < logs.size(); ++k)
      CHECK(logs[k] / logs[k - 1] >= 1.8);
  }

  TEST_CASE("n = 3 solutions") {
    for (const char* name : {"strict3", "strict3m2"}) {
      CAPTURE(name);
      const GeometrySetup setup = named_setup(name, 12);
      const EllipticSolution sol = solve_elliptic(setup, ScalarField(setup.grid()));
      CHECK(sol.residual_norm < 1e-10);
      CHECK(testing::sup_norm((sol.psi - flat_oracle(setup)).data()) < 1e-9);
    }
  }

  TEST_CASE("boundary scenario converges") {
    const GeometrySetup setup = named_setup("boundary", 32);
    const EllipticSolution sol = solve_elliptic(setup, ScalarField(setup.grid()));
    CHECK(sol.residual_norm < 1e-10);
    CHECK(sol.newton_iterations <= 10);
    CHECK(testing::sup_norm((sol.psi - flat_oracle(setup)).data()) < 1e-9);
  }

  TEST_CASE("linearization coefficients") {
    const GeometrySetup triv = named_setup("trivial", 8);
    const LinearizationCoefficients unit =
        linearization_coefficients(make_state(triv, ScalarField(triv.grid()), 0.0), triv);
    CHECK((unit.a.array() - 1.0).abs().maxCoeff() < 1e-14);

    const GeometrySetup setup = named_setup("strict3", 8);
    ScenarioSpec spec = named_scenario("strict3");
    spec.points = 8;
    const LinearizationCoefficients coeff =
        linearization_coefficients(make_state(setup, scenario_phi0(spec), 0.0), setup);
    CHECK(coeff.a.minCoeff() > 0.0);
  }

  TEST_CASE("linearized operator is a second-order Jacobian") {
    ScenarioSpec spec = named_scenario("strict");
    spec.points = 32;
    const GeometrySetup setup = build_scenario(spec);
    const ScalarField phi = scenario_phi0(spec);
    const LinearizedOperator op(make_state(setup, phi, 0.0), setup);
    Rng rng(5);
    const ScalarField delta = testing::random_trig(setup.grid(), rng, 0.05);
    const Eigen::VectorXd exact = op.apply(delta.data());
    double err[2];
    double eps = 1e-2;
    for (double& e : err) {
      const ScalarField up = flow_rhs(make_state(setup, phi + delta * eps, 0.0), setup);
      const ScalarField down = flow_rhs(make_state(setup, phi + delta * (-eps), 0.0), setup);
      e = testing::sup_norm((up.data() - down.data()) / (2.0 * eps) - exact);
      eps *= 0.5;
    }
    CHECK(std::log2(err[0] / err[1]) > 1.9);
  }

  TEST_CASE("flow limit comparison") {
    const GeometrySetup setup = named_setup("strict", 16);
    const EllipticSolution sol = solve_elliptic(setup, ScalarField(setup.grid()));
    const AmpMask all{setup.grid(), {}, 0.0};
    for (double k : {0.0, 3.0}) {
      CAPTURE(k);
      const double target = j_functional(setup.n(), sol.psi + k, setup);
      const FlowLimitComparison cmp = compare_flow_limit(sol.psi + k, sol, setup, all, target);
      CHECK(cmp.spread < 1e-12);
      CHECK(cmp.shift == doctest::Approx(k).epsilon(1e-9));
      CHECK(cmp.sup_difference < 1e-9);
    }
  }

  TEST_CASE("gmres on a small system") {
    Eigen::MatrixXd a(3, 3);
    a << 4, 1, 0, 1, 3, 1, 0, 1, 2;
    const Eigen::VectorXd b = Eigen::Vector3d(1, 2, 3);
    const GmresResult r = gmres([&](const Eigen::VectorXd& x) { Eigen::VectorXd y = a * x; return y; },
                                [](const Eigen::VectorXd& x) { return x; }, b, 1e-12);
    CHECK(r.converged);
    CHECK(r.iterations <= 3);
    CHECK((a * r.x - b).norm() < 1e-11);
  }
}
