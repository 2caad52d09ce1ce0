#include <cmath>

#include "common.hpp"
#include "doctest.h"
#include "jflow/cone.hpp"
#include "jflow/functionals.hpp"

using namespace jflow;

namespace {

GeometrySetup small_strict(int n, int m, int points) {
  ScenarioSpec spec = named_scenario(n == 2 ? "strict" : "strict3");
  spec.m = m;
  spec.points = points;
  return build_scenario(spec);
}

// int v X_u^i ^ omega^(n-i)
double weighted(const GeometrySetup& setup, const ScalarField& weight, const ScalarField& u, int i) {
  const int n = setup.n();
  const SymFormField x = total_form(setup, u);
  const Eigen::MatrixXd e = relative_elem_sym(x, setup.frame());
  Eigen::VectorXd density(weight.data().size());
  for (Index p = 0; p < density.size(); ++p)
    density(p) = weight[p] * e(i, p) / binomial(n, i) * setup.frame().det(p);
  return integrate(setup.grid(), density);
}

}  // namespace

TEST_SUITE("functionals") {
  TEST_CASE("J functionals of constants") {
    const GeometrySetup setup = small_strict(2, 1, 16);
    const ScalarField zero(setup.grid());
    for (int i = 0; i <= 2; ++i) CHECK(j_functional(i, zero, setup) == 0.0);
    CHECK(combined_functional(zero, setup) == 0.0);
    CHECK(theorem_normalization(zero, setup) == 0.0);
    const ScalarField k = zero + 1.7;
    for (int i = 0; i <= 2; ++i) {
      const double expect = 1.7 * wedge_integral({{&setup.background(), i}, {&setup.omega(), 2 - i}},
                                                 setup.omega());
      CHECK(j_functional(i, k, setup) == doctest::Approx(expect).epsilon(1e-12));
    }
  }

  TEST_CASE("J functionals are path independent") {
    for (int n = 2; n <= 3; ++n) {
      const GeometrySetup setup = small_strict(n, 1, n == 2 ? 24 : 12);
      Rng rng(40 + n);
      const ScalarField u = testing::random_trig(setup.grid(), rng, 0.02);
      const ScalarField w = testing::random_trig(setup.grid(), rng, 0.02);
      // Curved path v(s) = s u + s (1 - s) w, v' = u + (1 - 2s) w, 64 Simpson intervals.
      const int intervals = 64;
      for (int i = 0; i <= n; ++i) {
        double sum = 0.0;
        for (int q = 0; q <= intervals; ++q) {
          const double s = static_cast<double>(q) / intervals;
          const ScalarField v = u * s + w * (s * (1 - s));
          const ScalarField dv = u + w * (1 - 2 * s);
          const double weight = (q == 0 || q == intervals) ? 1.0 : (q % 2 ? 4.0 : 2.0);
          sum += weight * weighted(setup, dv, v, i);
        }
        const double path = sum / (3.0 * intervals);
        CHECK(path == doctest::Approx(j_functional(i, u, setup)).epsilon(1e-8));
      }
    }
  }

  TEST_CASE("combined functional is translation invariant") {
    const GeometrySetup setup = small_strict(3, 2, 12);
    Rng rng(7);
    const ScalarField u = testing::random_trig(setup.grid(), rng, 0.005);
    std::uniform_real_distribution<double> shift(-5.0, 5.0);
    const double base = combined_functional(u, setup);
    for (int trial = 0; trial < 5; ++trial)
      CHECK(combined_functional(u + shift(rng), setup) == doctest::Approx(base).epsilon(1e-10));
  }

  TEST_CASE("normalization quantity is (n+1) J_n") {
    for (int n = 2; n <= 3; ++n) {
      const GeometrySetup setup = small_strict(n, 1, n == 2 ? 16 : 8);
      Rng rng(11);
      const ScalarField u = testing::random_trig(setup.grid(), rng, 0.02) + 0.3;
      CHECK(theorem_normalization(u, setup) ==
            doctest::Approx((n + 1) * j_functional(n, u, setup)).epsilon(1e-10));
      const FunctionalValues all = evaluate_functionals(u, setup);
      for (int i = 0; i <= n; ++i)
        CHECK(all.j[static_cast<std::size_t>(i)] == doctest::Approx(j_functional(i, u, setup)).epsilon(1e-12));
      CHECK(all.combined == doctest::Approx(combined_functional(u, setup)).epsilon(1e-12));
    }
  }

  TEST_CASE("J_n grows with slope equal to the volume") {
    const GeometrySetup setup = small_strict(2, 1, 16);
    Rng rng(2);
    const ScalarField u = testing::random_trig(setup.grid(), rng, 0.02);
    const double j0 = j_functional(2, u, setup);
    CHECK(j_functional(2, u + 0.5, setup) - j0 == doctest::Approx(0.5 * setup.volume()).epsilon(1e-12));
  }

  TEST_CASE("dissipation vanishes at a stationary state") {
    ScenarioSpec spec = named_scenario("trivial");
    spec.points = 8;
    const GeometrySetup setup = build_scenario(spec);
    CHECK(dissipation(make_state(setup, ScalarField(setup.grid()), 0.0), setup) == 0.0);
  }

  TEST_CASE("inadmissible input is rejected") {
    const GeometrySetup setup = small_strict(2, 1, 16);
    const ScalarField bad = ScalarField::from_function(
        setup.grid(), [](const Eigen::VectorXd& x) { return 3.0 * std::cos(2 * std::numbers::pi * x(0)); });
    CHECK_THROWS_AS(j_functional(2, bad, setup), GeometryError);
  }

  TEST_CASE("ledger requires increasing times") {
    FunctionalLedger ledger;
    ledger.append({0.0, {0, 0, 0}, 0, 0, 0});
    ledger.append({0.5, {0, 0, 0}, 0, 0, 0});
    CHECK_THROWS_AS(ledger.append({0.5, {0, 0, 0}, 0, 0, 0}), ArgumentError);
    CHECK(ledger.size() == 2);
  }
}
