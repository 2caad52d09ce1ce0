#include <cmath>
#include <numbers>

#include "common.hpp"
#include "doctest.h"
#include "jflow/geometry.hpp"
#include "jflow/setup.hpp"

using namespace jflow;
using std::numbers::pi;

namespace {

Eigen::MatrixXd diag(std::initializer_list<double> d) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) v(i++) = x;
  return v.asDiagonal();
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("complex Hessian of simple potentials") {
    const PeriodicGrid grid(2, 16);
    const SymFormField zero = complex_hessian(ScalarField(grid, Eigen::VectorXd::Constant(256, 3.0)));
    CHECK(zero.entries().cwiseAbs().maxCoeff() < 1e-10);

    const ScalarField phi =
        ScalarField::from_function(grid, [](const Eigen::VectorXd& x) { return std::cos(2 * pi * x(0)); });
    const SymFormField h = complex_hessian(phi);
    double err = 0.0;
    for (Index p = 0; p < grid.total_points(); ++p) {
      err = std::max(err, std::abs(h.at(p)(0, 0) + pi * pi * std::cos(2 * pi * grid.coordinate(p, 0))));
      err = std::max(err, std::abs(h.at(p)(0, 1)) + std::abs(h.at(p)(1, 1)));
    }
    CHECK(err < 1e-11);
  }

  TEST_CASE("spectral Hessian is exact on trigonometric polynomials") {
    for (int n = 2; n <= 3; ++n) {
      const PeriodicGrid grid(n, 12);
      const ScalarField u = ScalarField::from_function(grid, [&](const Eigen::VectorXd& x) {
        double arg = 2 * pi * (2 * x(0) - 3 * x(1) + (n == 3 ? x(2) : 0.0)) + 0.4;
        return std::sin(arg);
      });
      const SymFormField h = complex_hessian(u);
      const int k[3] = {2, -3, 1};
      double err = 0.0;
      for (Index p = 0; p < grid.total_points(); ++p) {
        double arg = 0.4;
        for (int j = 0; j < n; ++j) arg += 2 * pi * k[j] * grid.coordinate(p, j);
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            const double exact = -0.25 * 4 * pi * pi * k[a] * k[b] * std::sin(arg);
            err = std::max(err, std::abs(h.at(p)(a, b) - exact));
          }
      }
      CHECK(err < 1e-10);
    }
  }

  TEST_CASE("complex Hessian is linear") {
    const PeriodicGrid grid(2, 16);
    Rng rng(1);
    const ScalarField a = testing::random_trig(grid, rng, 1.0);
    const ScalarField b = testing::random_trig(grid, rng, 1.0);
    const SymFormField lhs = complex_hessian(a * 2.5 + b * (-0.7));
    const SymFormField rhs = complex_hessian(a) * 2.5 + complex_hessian(b) * (-0.7);
    CHECK((lhs.entries() - rhs.entries()).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("admissibility") {
    const PeriodicGrid grid(2, 16);
    const SymFormField chi = SymFormField::constant(grid, diag({1.0, 2.0}));
    const SymFormField tilde = SymFormField::constant(grid, diag({0.5, 0.5}));
    const SymFormField omega = SymFormField::constant(grid, Eigen::MatrixXd::Identity(2, 2));
    const GeometrySetup setup = GeometrySetup::create(chi, tilde, omega, 1);
    const auto [ok0, lo0] = admissible(setup, ScalarField(grid));
    CHECK(ok0);
    CHECK(lo0 == doctest::Approx(1.5));

    // (1/4) d^2/dx^2 of -a cos(2 pi x) is a pi^2 cos: dips to -a pi^2.
    const double amp = 1.5 / (pi * pi) + 0.1;
    const ScalarField bad = ScalarField::from_function(
        grid, [&](const Eigen::VectorXd& x) { return amp * std::cos(2 * pi * x(0)); });
    const auto [ok1, lo1] = admissible(setup, bad);
    CHECK_FALSE(ok1);
    CHECK(lo1 < 0.0);

    Rng rng(3);
    const ScalarField u = testing::random_trig(grid, rng, 0.02);
    CHECK(admissible(setup, u).second == doctest::Approx(admissible(setup, u + 7.0).second).epsilon(1e-12));
  }

  TEST_CASE("wedge integrals") {
    const PeriodicGrid grid(2, 8);
    const SymFormField omega = SymFormField::constant(grid, Eigen::MatrixXd::Identity(2, 2));
    CHECK(wedge_integral({{&omega, 2}}, omega) == doctest::Approx(1.0));
    const SymFormField chi = SymFormField::constant(grid, diag({1.3, 0.4}));
    CHECK(wedge_integral({{&chi, 1}, {&omega, 1}}, omega) == doctest::Approx((1.3 + 0.4) / 2));
    CHECK_THROWS_AS(wedge_integral({{&chi, 1}}, omega), ArgumentError);
  }

  TEST_CASE("top-degree integral is independent of the potential") {
    Rng rng(12);
    for (int n = 2; n <= 3; ++n) {
      const PeriodicGrid grid(n, n == 2 ? 32 : 16);
      Eigen::MatrixXd base = random_pd_form(n, rng, 0.5, true).entries().real();
      const SymFormField omega =
          SymFormField::constant(grid, random_pd_form(n, rng, 0.5, true).entries().real());
      const SymFormField chi = SymFormField::constant(grid, base);
      const double ref = wedge_integral({{&chi, n}}, omega);
      for (int trial = 0; trial < 3; ++trial) {
        const SymFormField x = chi + complex_hessian(testing::random_trig(grid, rng, 0.3));
        CHECK(std::abs(wedge_integral({{&x, n}}, omega) - ref) < 1e-10 * std::abs(ref));
        for (int k = 1; k < n; ++k)
          CHECK(wedge_integral({{&x, k}, {&omega, n - k}}, omega) ==
                doctest::Approx(wedge_integral({{&chi, k}, {&omega, n - k}}, omega)).epsilon(1e-10));
      }
    }
  }

  TEST_CASE("two-field table agrees with the mixed-discriminant route") {
    const PeriodicGrid grid(3, 4);
    Rng rng(21);
    SymFormField a(grid), b(grid);
    for (Index p = 0; p < grid.total_points(); ++p) {
      a.at(p) = random_pd_form(3, rng, 0.2, true).entries().real();
      b.at(p) = random_pd_form(3, rng, 0.2, true).entries().real();
    }
    const SymFormField omega =
        SymFormField::constant(grid, random_pd_form(3, rng, 0.5, true).entries().real());
    const MixedWedgeTable table(a, b, ReferenceFrame(omega));
    for (int i = 0; i <= 3; ++i)
      for (int j = 0; i + j <= 3; ++j)
        for (Index p = 0; p < grid.total_points(); p += 7) {
          const HermForm fa = a.form(p), fb = b.form(p), fo = omega.form(p);
          const double md = wedge_coefficient({{&fa, i}, {&fb, j}, {&fo, 3 - i - j}});
          CHECK(table.coefficient(i, j)(p) == doctest::Approx(md).epsilon(1e-10));
        }
  }

  TEST_CASE("relative elementary symmetric functions match generalized eigenvalues") {
    const PeriodicGrid grid(3, 4);
    Rng rng(30);
    SymFormField x(grid);
    for (Index p = 0; p < grid.total_points(); ++p)
      x.at(p) = random_pd_form(3, rng, 0.1, true).entries().real();
    const SymFormField omega =
        SymFormField::constant(grid, random_pd_form(3, rng, 0.5, true).entries().real());
    const ReferenceFrame frame(omega);
    const Eigen::MatrixXd e = relative_elem_sym(x, frame);
    const EigenFrameField ef = relative_eigenframe(x, frame);
    for (Index p = 0; p < grid.total_points(); ++p) {
      const Eigen::VectorXd lambda = gen_eigen(x.form(p), omega.form(p)).values;
      for (int k = 0; k <= 3; ++k)
        CHECK(e(k, p) == doctest::Approx(elem_sym(k, lambda)).epsilon(1e-11));
      for (int i = 0; i < 3; ++i) CHECK(ef.values(i, p) == doctest::Approx(lambda(i)).epsilon(1e-11));
    }
  }

  TEST_CASE("amp locus") {
    const PeriodicGrid grid(2, 16);
    const SymFormField omega = SymFormField::constant(grid, Eigen::MatrixXd::Identity(2, 2));
    const SymFormField half = SymFormField::constant(grid, 0.5 * Eigen::MatrixXd::Identity(2, 2));
    CHECK(amp_locus(half, omega, 0.1).count() == grid.total_points());
    CHECK(amp_locus(half, omega, 0.6).count() == 0);

    SymFormField tilde(grid);
    std::vector<bool> expect;
    for (Index p = 0; p < grid.total_points(); ++p) {
      const double h = std::pow(std::sin(pi * grid.coordinate(p, 0)), 2);
      tilde.at(p) = diag({h, 1.0});
      expect.push_back(h >= 1e-3);
    }
    const AmpMask mask = amp_locus(tilde, omega, 1e-3);
    CHECK(mask.mask == expect);
    CHECK(mask.count() == grid.total_points() - 16);
  }

  TEST_CASE("compute_c") {
    const PeriodicGrid grid(3, 4);
    const SymFormField id = SymFormField::constant(grid, Eigen::MatrixXd::Identity(3, 3));
    const SymFormField zero(grid);
    for (int m = 1; m < 3; ++m) CHECK(compute_c(id, zero, id, m) == doctest::Approx(3.0));

    const PeriodicGrid g2(2, 4);
    const SymFormField w2 = SymFormField::constant(g2, Eigen::MatrixXd::Identity(2, 2));
    const SymFormField chi = SymFormField::constant(g2, diag({0.8, 2.5}));
    const SymFormField z2(g2);
    CHECK(compute_c(chi, z2, w2, 1) == doctest::Approx((0.8 + 2.5) / (0.8 * 2.5)));

    Rng rng(5);
    const SymFormField base = id + complex_hessian(testing::random_trig(grid, rng, 0.02));
    for (int m = 1; m < 3; ++m) {
      const double c1 = compute_c(base, zero, id, m);
      const double c2 = compute_c(base * 1.7, zero, id, m);
      CHECK(c2 == doctest::Approx(c1 * std::pow(1.7, m - 3)).epsilon(1e-12));
    }
  }

  TEST_CASE("setup rejects bad input") {
    const PeriodicGrid grid(2, 4);
    const SymFormField id = SymFormField::constant(grid, Eigen::MatrixXd::Identity(2, 2));
    const SymFormField neg = SymFormField::constant(grid, diag({1.0, -0.1}));
    CHECK_THROWS_AS(GeometrySetup::create(neg, id, id, 1), GeometryError);
    CHECK_THROWS_AS(GeometrySetup::create(id, neg, id, 1), GeometryError);
    CHECK_THROWS_AS(GeometrySetup::create(id, SymFormField(grid), id, 1), GeometryError);
    CHECK_NOTHROW(GeometrySetup::create(id, SymFormField(grid), id, 1, DiffScheme::kSpectral, {false}));
    CHECK_THROWS_AS(GeometrySetup::create(id, id, id, 2), ArgumentError);
  }
}
