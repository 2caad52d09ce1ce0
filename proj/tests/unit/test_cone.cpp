#include <cmath>

#include "doctest.h"
#include "jflow/cone.hpp"

using namespace jflow;

namespace {

SymFormField constant(const PeriodicGrid& grid, const Eigen::MatrixXd& m) {
  return SymFormField::constant(grid, m);
}

}  // namespace

TEST_SUITE("cone") {
  TEST_CASE("constant n = 2 examples") {
    // n = 2, m = 1: kappa_i = c mu_j - 1.
    const PeriodicGrid grid(2, 4);
    const SymFormField id = constant(grid, Eigen::MatrixXd::Identity(2, 2));
    const ConeReport strict = cone_condition(id, id, 1, 2.0);
    CHECK(strict.classification == ConeClass::kStrict);
    CHECK(strict.global_min == doctest::Approx(1.0));
    const ConeReport boundary = cone_condition(id, id, 1, 1.0);
    CHECK(boundary.classification == ConeClass::kBoundary);
    CHECK(std::abs(boundary.global_min) < 1e-14);
    const ConeReport violated = cone_condition(id, id, 1, 0.5);
    CHECK(violated.classification == ConeClass::kViolated);
    CHECK(violated.global_min == doctest::Approx(-0.5));

    Eigen::MatrixXd d = Eigen::Vector2d(1.0, 3.0).asDiagonal();
    const ConeReport r = cone_condition(constant(grid, d), id, 1, 0.5);
    CHECK(r.global_min == doctest::Approx(-0.5));
    CHECK(r.argmin_direction == 1);  // kappa along the small eigenvalue uses mu = 1
  }

  TEST_CASE("class strings") {
    for (ConeClass c : {ConeClass::kStrict, ConeClass::kBoundary, ConeClass::kViolated})
      CHECK(cone_class_from_string(to_string(c)) == c);
  }

  TEST_CASE("joint scaling keeps the class") {
    for (const char* name : {"strict", "strict3", "strict3m2"}) {
      CAPTURE(name);
      ScenarioSpec spec = named_scenario(name);
      spec.points = 8;
      spec.target.reset();
      const GeometrySetup a = build_scenario(spec);
      const ConeReport ra = cone_condition(a.chi(), a.omega(), a.m(), a.c());
      spec.scale *= 3.0;
      const GeometrySetup b = build_scenario(spec);
      const ConeReport rb = cone_condition(b.chi(), b.omega(), b.m(), b.c());
      CHECK(rb.classification == ra.classification);
      // kappa is homogeneous of degree m - 1 under joint scaling.
      const double factor = std::pow(3.0, a.m() - 1);
      CHECK((rb.kappa - factor * ra.kappa).cwiseAbs().maxCoeff() < 1e-10);
    }
  }

  TEST_CASE("named scenarios have their classes") {
    for (const std::string& name : scenario_names()) {
      CAPTURE(name);
      ScenarioSpec spec = named_scenario(name);
      spec.points = 16;
      if (spec.target == ConeClass::kBoundary) {
        const CalibratedScenario cal = calibrate_boundary_scenario(spec);
        CHECK(std::abs(cal.report.global_min) <= kToleranceBoundary);
        CHECK(cal.report.classification == ConeClass::kBoundary);
      } else if (name == "degenerate") {
        CHECK_NOTHROW(degenerate_chi_tilde_scenario(spec));
      } else {
        CHECK_NOTHROW(build_scenario(spec));
      }
    }
  }

  TEST_CASE("calibration is idempotent") {
    ScenarioSpec spec = named_scenario("boundary");
    spec.points = 16;
    const CalibratedScenario first = calibrate_boundary_scenario(spec);
    CHECK(first.factor != 1.0);
    const CalibratedScenario again = calibrate_boundary_scenario(first.spec);
    CHECK(again.factor == 1.0);
    CHECK(std::abs(again.report.global_min) <= kToleranceBoundary);
  }

  TEST_CASE("conformal family of a constant setup cannot be calibrated") {
    ScenarioSpec spec;
    spec.points = 4;
    spec.family = ScenarioFamily::kConformal;
    spec.require_big = false;
    spec.target = ConeClass::kBoundary;
    CHECK_THROWS_AS(calibrate_boundary_scenario(spec), CalibrationError);
  }

  TEST_CASE("wrong target class is rejected") {
    ScenarioSpec spec = named_scenario("strict");
    spec.points = 8;
    spec.target = ConeClass::kViolated;
    CHECK_THROWS_AS(build_scenario(spec), ScenarioError);
  }

  TEST_CASE("degenerate scenario and its mask") {
    ScenarioSpec spec = named_scenario("degenerate");
    spec.points = 16;
    const GeometrySetup setup = degenerate_chi_tilde_scenario(spec);
    const AmpMask mask = amp_locus(setup.chi_tilde(), setup.omega(), 1e-3);
    CHECK(mask.count() > 0);
    CHECK(mask.count() < setup.grid().total_points());

    ScenarioSpec bad = spec;
    bad.tilde_base = {-0.5, 1.0};
    CHECK_THROWS_AS(degenerate_chi_tilde_scenario(bad), ScenarioError);
  }

  TEST_CASE("normalization against the mixed discriminant") {
    CHECK_NOTHROW(check_cone_normalization(50, 3));
  }
}
