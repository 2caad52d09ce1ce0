#include <cmath>

#include "common.hpp"
#include "doctest.h"
#include "jflow/cone.hpp"
#include "jflow/flow.hpp"

using namespace jflow;

namespace {

struct Problem {
  ScenarioSpec spec;
  GeometrySetup setup;
  ScalarField phi0;
};

Problem strict_problem(int points) {
  ScenarioSpec spec = named_scenario("strict");
  spec.points = points;
  GeometrySetup setup = build_scenario(spec);
  ScalarField phi0 = scenario_phi0(spec);
  return {spec, std::move(setup), std::move(phi0)};
}

Problem trivial_problem(int points) {
  ScenarioSpec spec = named_scenario("trivial");
  spec.points = points;
  GeometrySetup setup = build_scenario(spec);
  return {spec, setup, ScalarField(setup.grid())};
}

ScalarField integrate_fixed(const Problem& p, double t_end, int steps, Integrator method) {
  FlowState s = make_state(p.setup, p.phi0, 0.0);
  for (int k = 0; k < steps; ++k) {
    StepStats stats;
    s = step(s, p.setup, t_end / steps, method, {}, &stats);
    REQUIRE(stats.halvings == 0);
  }
  return s.phi;
}

}  // namespace

TEST_SUITE("flow") {
  TEST_CASE("right-hand side examples") {
    const Problem triv = trivial_problem(8);
    const FlowState s = make_state(triv.setup, triv.phi0, 0.0);
    CHECK(triv.setup.c() == doctest::Approx(2.0));
    CHECK(testing::sup_norm(flow_rhs(s, triv.setup).data()) < 1e-14);

    Eigen::MatrixXd e(3, 1);
    e << 1.0, 4.0, 4.0;  // eigenvalues (2, 2)
    Eigen::VectorXd rhs(1);
    Index bad = -1;
    REQUIRE(detail::rhs_from_elem_sym(e, 2, 1, 2.0, rhs, bad));
    CHECK(rhs(0) == doctest::Approx(1.0));
    e(2, 0) = -1.0;
    CHECK_FALSE(detail::rhs_from_elem_sym(e, 2, 1, 2.0, rhs, bad));
    CHECK(bad == 0);
  }

  TEST_CASE("right-hand side has zero mean against X^n") {
    const Problem p = strict_problem(32);
    const FlowState s = make_state(p.setup, p.phi0, 0.0);
    const ScalarField rhs = flow_rhs(s, p.setup);
    Eigen::VectorXd signed_density = rhs.data().cwiseProduct(s.elem_sym.row(2).transpose());
    const double total = integrate(p.setup.grid(), signed_density);
    const double scale = integrate(p.setup.grid(), signed_density.cwiseAbs());
    CHECK(std::abs(total) < 1e-10 * scale);
  }

  TEST_CASE("stationary input stays put") {
    const Problem p = trivial_problem(8);
    const FlowState s0 = make_state(p.setup, p.phi0, 0.0);
    const FlowState s1 = step(s0, p.setup, 0.01, Integrator::kRk4);
    CHECK(testing::sup_norm(s1.phi.data()) < 1e-14);
    CHECK(s1.t == doctest::Approx(0.01));
  }

  TEST_CASE("RK4 converges at fourth order and Euler at first") {
    const Problem p = strict_problem(16);
    const FlowState s0 = make_state(p.setup, p.phi0, 0.0);
    const double dt = stable_dt(s0, Integrator::kRk4, 0.5);
    const double t_end = 8 * dt;
    const ScalarField a = integrate_fixed(p, t_end, 8, Integrator::kRk4);
    const ScalarField b = integrate_fixed(p, t_end, 16, Integrator::kRk4);
    const ScalarField c = integrate_fixed(p, t_end, 32, Integrator::kRk4);
    const double order = std::log2(testing::sup_norm((a - b).data()) / testing::sup_norm((b - c).data()));
    CHECK(order >= 3.5);

    const double edt = stable_dt(s0, Integrator::kExplicitEuler, 0.5);
    const ScalarField e1 = integrate_fixed(p, 32 * edt, 32, Integrator::kExplicitEuler);
    const ScalarField e2 = integrate_fixed(p, 32 * edt, 64, Integrator::kExplicitEuler);
    const ScalarField e3 = integrate_fixed(p, 32 * edt, 128, Integrator::kExplicitEuler);
    const double eorder =
        std::log2(testing::sup_norm((e1 - e2).data()) / testing::sup_norm((e2 - e3).data()));
    CHECK(eorder == doctest::Approx(1.0).epsilon(0.1));
  }

  TEST_CASE("admissibility guard halves oversized steps") {
    const Problem p = strict_problem(16);
    const FlowState s0 = make_state(p.setup, p.phi0, 0.0);
    StepStats stats;
    const FlowState s1 = step(s0, p.setup, 50.0, Integrator::kRk4, {}, &stats);
    CHECK(stats.halvings > 0);
    CHECK(stats.dt_accepted < 50.0);
    CHECK(admissible(p.setup, s1.phi).first);
    CHECK(s1.min_eigenvalue >= 0.5 * s0.min_eigenvalue);

    StepOptions strict_options;
    strict_options.max_halvings = 2;
    CHECK_THROWS_AS(step(s0, p.setup, 50.0, Integrator::kRk4, strict_options), StiffnessError);
  }

  TEST_CASE("trivial run converges immediately") {
    const Problem p = trivial_problem(8);
    FlowConfig cfg;
    cfg.psi = ScalarField(p.setup.grid());
    const RunResult r = run(p.setup, p.phi0, cfg);
    CHECK(r.converged);
    CHECK(r.trajectory.records.size() == 1);
    CHECK(r.steps == 0);
    for (const MonitorCheck& c : r.monitor.checks)
      if (c.name.rfind("sign", 0) != 0) CHECK(c.worst() == 0.0);
  }

  TEST_CASE("inadmissible initial data is rejected") {
    const Problem p = strict_problem(16);
    CHECK_THROWS_AS(run(p.setup, p.phi0 * 100.0, FlowConfig{}), PreconditionError);
  }

  TEST_CASE("short strict run: conservation, monotonicity, envelopes") {
    const Problem p = strict_problem(32);
    FlowConfig cfg;
    cfg.t_max = 0.5;
    cfg.record_interval = 0.05;
    const RunResult r = run(p.setup, p.phi0, cfg);
    REQUIRE(r.trajectory.records.size() == 11);
    const auto& rows = r.ledger.rows();
    for (const FunctionalRow& row : rows) {
      CHECK(row.j.back() == doctest::Approx(rows.front().j.back()).epsilon(1e-10));
      CHECK(row.theorem_norm == doctest::Approx(rows.front().theorem_norm).epsilon(1e-10));
    }
    for (std::size_t k = 1; k < rows.size(); ++k) CHECK(rows[k].combined >= rows[k - 1].combined - 1e-12);
    CHECK_FALSE(r.monitor.any_violation());
    CHECK(r.monitor.fit("global")->stabilized);
    for (const TrajectoryRecord& rec : r.trajectory.records) CHECK(std::abs(rec.rhs_mean_residual) < 1e-9);
  }

  TEST_CASE("a perturbation mid-run is flagged") {
    const Problem p = strict_problem(16);
    FlowConfig cfg;
    cfg.t_max = 0.2;
    cfg.record_interval = 0.05;
    cfg.keep_fields = true;
    RunResult first = run(p.setup, p.phi0, cfg);
    const ScalarField kick = ScalarField::from_function(p.setup.grid(), [](const Eigen::VectorXd& x) {
      return 0.02 * std::cos(2 * std::numbers::pi * 3 * x(0));
    });
    RunResult second = run(p.setup, first.final_state.phi + kick, cfg);
    Trajectory merged = first.trajectory;
    for (TrajectoryRecord rec : second.trajectory.records) {
      rec.t += first.final_state.t + 1e-3;
      merged.records.push_back(std::move(rec));
    }
    const MonitorReport clean = monitor_max_principle(first.trajectory, 1e-6);
    CHECK_FALSE(clean.any_violation());
    const MonitorReport dirty = monitor_max_principle(merged, 1e-6);
    CHECK(dirty.any_violation());
  }

  TEST_CASE("upper hull and exponential fit") {
    const Hull h = Hull::of({{0, 0}, {1, 1}, {2, 1.5}, {1, 0.2}, {0.5, 0.1}});
    REQUIRE(h.s.size() == 3);
    CHECK(h.s == std::vector<double>{0, 1, 2});
    const ExponentialFit f = fit_exponential(h, 0.5);
    CHECK(f.a == doctest::Approx(1.0));
    CHECK(f.log_c == doctest::Approx(0.0));
    const ExponentialFit g = fit_exponential(h, 1.5);
    CHECK(g.a == doctest::Approx(0.5));
    CHECK(g.log_c == doctest::Approx(0.5));
    const ExponentialFit flat = fit_exponential(Hull::of({{0, 0.7}, {3, 0.7}}), 1.0);
    CHECK(flat.a == 0.0);
    CHECK(flat.log_c == doctest::Approx(0.7));
  }

  TEST_CASE("C0 monitor on a stationary run") {
    const Problem p = trivial_problem(8);
    FlowConfig cfg;
    const RunResult r = run(p.setup, p.phi0, cfg);
    const MonitorReport rep = c0_monitor(r.trajectory, ScalarField(p.setup.grid()), 1e-6);
    for (const MonitorCheck& c : rep.checks) CHECK(c.worst() == 0.0);
  }
}
