#include "jflow/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include "jflow/cone.hpp"
#include "jflow/config.hpp"
#include "jflow/flow.hpp"
#include "jflow/io.hpp"
#include "jflow/random.hpp"
#include "jflow/stationary.hpp"

#include "json.hpp"

namespace jflow {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string sci(double v) {
  std::ostringstream os;
  os << std::setprecision(3) << std::scientific << v;
  return os.str();
}

/// One flow run of the suite with its stationary reference.
struct SuiteRun {
  std::string label;
  ScenarioSpec spec;
  std::unique_ptr<GeometrySetup> setup;
  std::unique_ptr<EllipticSolution> newton;
  std::unique_ptr<RunResult> result;
  double jn0 = 0.0;
  double flow_seconds = 0.0;
  double newton_seconds = 0.0;
  std::string error;

  bool ok() const { return error.empty(); }
};

struct RunPlan {
  std::string scenario;
  double t_max;
  double tol_converge;
  double record_interval;
};

class Suite {
 public:
  explicit Suite(std::ostream* log) : log_(log) {}

  SuiteRun& get(const std::string& key) {
    auto it = runs_.find(key);
    if (it != runs_.end()) return *it->second;
    auto run = std::make_unique<SuiteRun>();
    execute(key, plan(key), *run);
    return *runs_.emplace(key, std::move(run)).first->second;
  }

  static const std::vector<std::string>& all_runs() {
    static const std::vector<std::string> keys = {"strict-t5", "strict-converged", "boundary-t200",
                                                  "strict3", "strict3m2"};
    return keys;
  }

 private:
  static RunPlan plan(const std::string& key) {
    if (key == "strict-t5") return {"strict", 5.0, 1e-8, 0.005};
    if (key == "strict-converged") return {"strict", 100.0, 1e-8, 0.5};
    // Convergence stop disabled so that the run reaches t = 200.
    if (key == "boundary-t200") return {"boundary", 200.0, 1e-15, 1.0};
    if (key == "strict3") return {"strict3", 4.0, 1e-8, 0.1};
    if (key == "strict3m2") return {"strict3m2", 4.0, 1e-8, 0.1};
    throw ArgumentError("unknown suite run " + key);
  }

  void execute(const std::string& key, const RunPlan& p, SuiteRun& r) {
    r.label = key;
    if (log_) *log_ << "  running " << key << " ..." << std::flush;
    try {
      r.spec = named_scenario(p.scenario);
      if (r.spec.target == ConeClass::kBoundary) {
        CalibratedScenario cal = calibrate_boundary_scenario(r.spec);
        r.spec = cal.spec;
        r.setup = std::make_unique<GeometrySetup>(std::move(cal.setup));
      } else {
        r.setup = std::make_unique<GeometrySetup>(build_scenario(r.spec));
      }
      const ScalarField phi0 = scenario_phi0(r.spec);
      r.jn0 = j_functional(r.setup->n(), phi0, *r.setup);

      auto t0 = Clock::now();
      r.newton = std::make_unique<EllipticSolution>(
          solve_elliptic(*r.setup, ScalarField(r.setup->grid())));
      r.newton_seconds = seconds_since(t0);

      FlowConfig cfg;
      cfg.t_max = p.t_max;
      cfg.tol_converge = p.tol_converge;
      cfg.record_interval = p.record_interval;
      cfg.psi = r.newton->psi;
      t0 = Clock::now();
      r.result = std::make_unique<RunResult>(run(*r.setup, phi0, cfg));
      r.flow_seconds = seconds_since(t0);
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    if (log_) {
      if (r.ok())
        *log_ << std::fixed << std::setprecision(2) << " t = " << r.result->final_state.t
              << ", " << r.result->steps << " steps, " << std::setprecision(1)
              << r.flow_seconds + r.newton_seconds << " s\n"
              << std::defaultfloat << std::setprecision(6);
      else
        *log_ << " failed: " << r.error << "\n";
    }
  }

  std::ostream* log_;
  std::map<std::string, std::unique_ptr<SuiteRun>> runs_;
};

struct Outcome {
  bool passed;
  std::string detail;
};

Outcome fail_run(const SuiteRun& r) { return {false, r.label + ": " + r.error}; }

// 1 -------------------------------------------------------------------------

Outcome wedge_oracle() {
  const auto t0 = Clock::now();
  Rng rng(20240601);
  std::uniform_real_distribution<double> uniform_c(0.2, 3.0);
  double worst_ratio = 0.0, worst_kappa = 0.0;
  for (int n = 2; n <= 4; ++n) {
    for (int draw = 0; draw < 1000; ++draw) {
      const HermForm a = random_pd_form(n, rng);
      const HermForm b = random_pd_form(n, rng, 0.5);
      const int m = 1 + draw % (n - 1);
      const double c = uniform_c(rng);

      const double ratio = mixed_wedge_ratio(a, b, m, n);
      const double oracle = n * mixed_discriminant({{&a, m}, {&b, n - m}}) /
                            mixed_discriminant({{&a, n}});
      worst_ratio = std::max(worst_ratio, std::abs(ratio - oracle) / std::abs(oracle));

      Eigen::GeneralizedSelfAdjointEigenSolver<ComplexMatrix> es(a.entries(), b.entries());
      const Eigen::VectorXd kappa = cone_form_coefficients(es.eigenvalues(), m, c);
      const double det_b = b.entries().determinant().real();
      for (int i = 0; i < n; ++i) {
        const Eigen::VectorXcd v = es.eigenvectors().col(i);
        const HermForm f(ComplexMatrix(b.entries() * v * v.adjoint() * b.entries()));
        const double full = c * mixed_discriminant({{&a, n - 1}, {&f, 1}});
        const double mixed = m * mixed_discriminant({{&a, m - 1}, {&b, n - m}, {&f, 1}});
        const double expect = (full - mixed) / (factorial(n - 1) * det_b);
        const double scale = (std::abs(full) + std::abs(mixed)) / (factorial(n - 1) * det_b);
        worst_kappa = std::max(worst_kappa, std::abs(kappa(i) - expect) / scale);
      }
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = worst_ratio < 1e-10 && worst_kappa < 1e-10 && secs < 30.0;
  return {ok, "max rel err: wedge ratio " + sci(worst_ratio) + ", cone coefficients " +
                  sci(worst_kappa) + " over 3000 draws"};
}

// 2 -------------------------------------------------------------------------

Outcome jn_conservation(Suite& suite) {
  SuiteRun& r = suite.get("strict-t5");
  if (!r.ok()) return fail_run(r);
  const auto& rows = r.result->ledger.rows();
  const double jn0 = rows.front().j.back();
  double drift = 0.0;
  for (const FunctionalRow& row : rows)
    drift = std::max(drift, std::abs(row.j.back() - jn0) / std::abs(jn0));
  const bool ok = drift < 1e-6 && r.flow_seconds < 300.0 && rows.back().t >= 5.0 - 1e-12;
  return {ok, "relative J_n drift " + sci(drift) + " over " + std::to_string(rows.size()) +
                  " records to t = " + std::to_string(rows.back().t).substr(0, 4)};
}

// 3 -------------------------------------------------------------------------

Outcome dissipation_identity(Suite& suite) {
  SuiteRun& r = suite.get("strict-t5");
  if (!r.ok()) return fail_run(r);
  const auto& rows = r.result->ledger.rows();
  double worst_identity = 0.0, worst_drop = 0.0;
  for (std::size_t k = 1; k + 1 < rows.size(); ++k) {
    const double deriv =
        (rows[k + 1].combined - rows[k - 1].combined) / (rows[k + 1].t - rows[k - 1].t);
    worst_identity = std::max(
        worst_identity, std::abs(deriv - rows[k].dissipation) / std::abs(rows[k].dissipation));
  }
  for (std::size_t k = 1; k < rows.size(); ++k)
    worst_drop = std::max(worst_drop, rows[k - 1].combined - rows[k].combined);
  const bool ok = worst_identity < 1e-3 && worst_drop <= 1e-8;
  return {ok, "max rel mismatch d/dt combined vs dissipation " + sci(worst_identity) +
                  ", largest decrease " + sci(std::max(0.0, worst_drop))};
}

// 4 -------------------------------------------------------------------------

Outcome max_principle(Suite& suite) {
  SuiteRun& r = suite.get("strict-t5");
  if (!r.ok()) return fail_run(r);
  std::ostringstream os;
  bool ok = true;
  for (const char* name :
       {"dphidt_upper", "dphidt_lower", "ratio_upper", "ratio_lower", "sign_sup", "sign_inf"}) {
    const MonitorCheck* c = r.result->monitor.check(name);
    if (!c) return {false, std::string("missing check ") + name};
    ok = ok && !c->violated();
    os << name << " " << sci(c->worst()) << (c->violated() ? " (violated) " : " ");
  }
  return {ok, "worst margins: " + os.str()};
}

// 5 -------------------------------------------------------------------------

Outcome strict_convergence(Suite& suite) {
  SuiteRun& r = suite.get("strict-converged");
  if (!r.ok()) return fail_run(r);
  const RunResult& res = *r.result;
  const FlowLimitComparison cmp =
      compare_flow_limit(res.final_state.phi, *r.newton, *r.setup, res.mask, r.jn0);
  const double sup_rate = res.trajectory.records.back().mask_sup_abs_dphidt;
  const double secs = r.flow_seconds + r.newton_seconds;
  const bool ok = res.converged && res.final_state.t <= 100.0 && r.newton->residual_norm < 1e-10 &&
                  cmp.sup_difference < 1e-5 && cmp.spread < 1e-6 && secs < 900.0;
  std::ostringstream os;
  os << "converged " << (res.converged ? "yes" : "no") << " at t = " << std::setprecision(4)
     << res.final_state.t << " (mask sup " << sci(sup_rate) << "); Newton residual "
     << sci(r.newton->residual_norm) << " in " << r.newton->newton_iterations
     << " its; spread " << sci(cmp.spread) << ", sup diff " << sci(cmp.sup_difference);
  return {ok, os.str()};
}

// 6 -------------------------------------------------------------------------

Outcome c0_bound(Suite& suite) {
  bool ok = true;
  double corrected = INFINITY;
  std::ostringstream os;
  for (const std::string& key : Suite::all_runs()) {
    SuiteRun& r = suite.get(key);
    if (!r.ok()) return fail_run(r);
    const MonitorReport rep = c0_monitor(r.result->trajectory, r.newton->psi, 1e-4);
    const MonitorCheck* up = rep.check("c0_upper");
    const MonitorCheck* lo = rep.check("c0_lower");
    ok = ok && !up->violated() && !lo->violated();
    corrected = std::min(corrected, rep.check("c0_lower_psi")->worst());
    os << key << " [" << sci(up->worst()) << ", " << sci(lo->worst()) << "] ";
  }
  os << "; min phi >= min phi_0 - |psi| holds with worst margin " << sci(corrected);
  return {ok, "worst upper/lower margins: " + os.str()};
}

// 7 -------------------------------------------------------------------------

double kendall_tau(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = (x[j] - x[i]) * (y[j] - y[i]);
      s += (a > 0) - (a < 0);
    }
  return n < 2 ? 0.0 : s / (0.5 * static_cast<double>(n * (n - 1)));
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

Outcome boundary_behavior(Suite& suite) {
  SuiteRun& r = suite.get("boundary-t200");
  if (!r.ok()) return fail_run(r);
  const auto& recs = r.result->trajectory.records;
  const auto& rows = r.result->ledger.rows();
  double min_eig = recs.front().min_eigenvalue;
  for (const TrajectoryRecord& rec : recs) min_eig = std::min(min_eig, rec.min_eigenvalue);
  const double t_end = recs.back().t;
  std::vector<double> t, sup;
  for (const TrajectoryRecord& rec : recs)
    if (rec.t >= 0.5 * t_end) {
      t.push_back(rec.t);
      sup.push_back(rec.mask_sup_abs_dphidt);
    }
  const double tau = kendall_tau(t, sup);
  const double slope = ls_slope(t, sup);
  const double norm0 = rows.front().theorem_norm;
  double norm_drift = 0.0;
  for (const FunctionalRow& row : rows)
    norm_drift = std::max(norm_drift, std::abs(row.theorem_norm - norm0) / std::abs(norm0));
  const double final_sup = recs.back().mask_sup_abs_dphidt;
  const bool ok = min_eig > 0.0 && t_end >= 200.0 - 1e-9 && final_sup < 1e-4 && tau < 0.0 &&
                  slope < 0.0 && norm_drift < 1e-5;
  std::ostringstream os;
  os << "t = " << t_end << ", min eigenvalue " << sci(min_eig) << ", mask sup |dphi/dt| "
     << sci(final_sup) << ", Kendall tau " << std::setprecision(3) << tau << ", LS slope "
     << sci(slope) << ", normalization drift " << sci(norm_drift) << ", mask "
     << r.result->mask.count() << "/" << r.setup->grid().total_points() << " points";
  return {ok, os.str()};
}

// 8 -------------------------------------------------------------------------

Outcome second_order_fit(Suite& suite) {
  bool ok = true;
  std::ostringstream os;
  for (const std::string& key : Suite::all_runs()) {
    SuiteRun& r = suite.get(key);
    if (!r.ok()) return fail_run(r);
    const ExponentialFit* g = r.result->monitor.fit("global");
    const bool stable = g && g->stabilized;
    ok = ok && stable;
    os << key << " A=" << std::setprecision(3) << (g ? g->a : NAN)
       << (stable ? " stable; " : " NOT stable; ");
  }
  SuiteRun& b = suite.get("boundary-t200");
  const ExponentialFit* mask = b.result->monitor.fit("mask");
  const double t_end = b.result->trajectory.records.back().t;
  const double contribution = std::abs(mask->a * b.setup->c() * t_end);
  const bool flat = mask->stabilized && contribution <= 0.05 * std::max(1.0, std::abs(mask->log_c));
  ok = ok && flat;
  os << "boundary mask fit log C=" << std::setprecision(4) << mask->log_c << " A c t_end="
     << sci(contribution) << (flat ? " (t-independent)" : " (t-dependent)");
  return {ok, os.str()};
}

// 9 -------------------------------------------------------------------------

Outcome jacobian_consistency() {
  double worst_order = INFINITY;
  std::ostringstream os;
  const char* scenarios[] = {"strict", "strict3", "strict3m2"};
  for (int k = 0; k < 10; ++k) {
    ScenarioSpec spec = named_scenario(scenarios[k % 3]);
    spec.points = spec.n == 2 ? 32 : 12;
    spec.seed += static_cast<std::uint64_t>(k);
    const GeometrySetup setup = build_scenario(spec);
    const ScalarField phi = scenario_phi0(spec);
    const FlowState base = make_state(setup, phi, 0.0);
    const LinearizedOperator op(base, setup);

    Rng rng(1000 + static_cast<std::uint64_t>(k));
    std::uniform_int_distribution<int> wave(-2, 2);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<PotentialMode> modes;
    for (int q = 0; q < 4; ++q) {
      PotentialMode mode;
      for (int j = 0; j < spec.n; ++j) mode.k.push_back(wave(rng));
      mode.amplitude = 0.05 * unit(rng);
      mode.phase = std::numbers::pi * unit(rng);
      modes.push_back(mode);
    }
    const ScalarField delta = ScalarField::from_function(setup.grid(), [&](const Eigen::VectorXd& x) {
      double v = 0.0;
      for (const PotentialMode& mode : modes) {
        double arg = mode.phase;
        for (int j = 0; j < spec.n; ++j) arg += 2.0 * std::numbers::pi * mode.k[j] * x(j);
        v += mode.amplitude * std::cos(arg);
      }
      return v;
    });
    const Eigen::VectorXd exact = op.apply(delta.data());
    double errors[3];
    double eps = 1e-2;
    for (double& err : errors) {
      const ScalarField up = flow_rhs(make_state(setup, phi + delta * eps, 0.0), setup);
      const ScalarField down = flow_rhs(make_state(setup, phi + delta * (-eps), 0.0), setup);
      const Eigen::VectorXd fd = (up.data() - down.data()) / (2.0 * eps);
      err = (fd - exact).cwiseAbs().maxCoeff();
      eps *= 0.5;
    }
    const double order = std::min(std::log2(errors[0] / errors[1]), std::log2(errors[1] / errors[2]));
    worst_order = std::min(worst_order, order);
  }
  os << "smallest observed order " << std::setprecision(4) << worst_order
     << " over 10 states (eps = 1e-2, 5e-3, 2.5e-3)";
  return {worst_order >= 1.9, os.str()};
}

// 10 ------------------------------------------------------------------------

Outcome cone_closed_form() {
  Rng rng(4242);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const PeriodicGrid grid(2, 4);
  int mismatches = 0, strict = 0, violated = 0, boundary = 0;
  for (int draw = 0; draw < 1000; ++draw) {
    const Eigen::MatrixXd chi = random_pd_form(2, rng, 0.1, true).entries().real();
    const Eigen::MatrixXd omega = random_pd_form(2, rng, 0.3, true).entries().real();
    const Eigen::MatrixXd tilde =
        random_pd_form(2, rng, 0.0, true).entries().real() * (3.0 * unit(rng));
    const SymFormField chi_f = SymFormField::constant(grid, chi);
    const SymFormField omega_f = SymFormField::constant(grid, omega);
    const double c = compute_c(chi_f, SymFormField::constant(grid, tilde), omega_f, 1);
    // det(chi - mu omega) = 0 by the quadratic formula.
    const double qa = omega.determinant();
    const double qb = chi(0, 0) * omega(1, 1) + chi(1, 1) * omega(0, 0) - 2.0 * chi(0, 1) * omega(0, 1);
    const double qc = chi.determinant();
    const double mu_min = (qb - std::sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa);
    const double value = c * mu_min - 1.0;
    const ConeClass expect = value > kToleranceBoundary    ? ConeClass::kStrict
                             : value < -kToleranceBoundary ? ConeClass::kViolated
                                                           : ConeClass::kBoundary;
    const ConeClass got = cone_condition(chi_f, omega_f, 1, c).classification;
    mismatches += got != expect;
    strict += expect == ConeClass::kStrict;
    violated += expect == ConeClass::kViolated;
    boundary += expect == ConeClass::kBoundary;
  }
  std::ostringstream os;
  os << mismatches << " mismatches in 1000 setups (" << strict << " strict, " << violated
     << " violated, " << boundary << " boundary)";
  return {mismatches == 0, os.str()};
}

}  // namespace

const std::vector<std::string>& property_names() {
  static const std::vector<std::string> names = {
      "wedge-oracle",       "jn-conservation", "dissipation-monotonicity",
      "max-principle",      "strict-convergence", "c0-bound",
      "boundary-behavior",  "second-order-fit",   "jacobian-consistency",
      "cone-closed-form-n2"};
  return names;
}

std::vector<PropertyResult> run_verify(const VerifyOptions& options) {
  const auto& names = property_names();
  std::vector<int> selected;
  if (options.properties.empty()) {
    for (std::size_t i = 0; i < names.size(); ++i) selected.push_back(static_cast<int>(i));
  } else {
    for (const std::string& p : options.properties) {
      const auto it = std::find(names.begin(), names.end(), p);
      if (it == names.end()) throw ArgumentError("unknown property '" + p + "'");
      selected.push_back(static_cast<int>(it - names.begin()));
    }
  }

  Suite suite(options.log);
  const std::function<Outcome()> checks[] = {
      [] { return wedge_oracle(); },
      [&] { return jn_conservation(suite); },
      [&] { return dissipation_identity(suite); },
      [&] { return max_principle(suite); },
      [&] { return strict_convergence(suite); },
      [&] { return c0_bound(suite); },
      [&] { return boundary_behavior(suite); },
      [&] { return second_order_fit(suite); },
      [] { return jacobian_consistency(); },
      [] { return cone_closed_form(); },
  };

  std::vector<PropertyResult> out;
  for (const int i : selected) {
    if (options.log) *options.log << "[" << i + 1 << "] " << names[i] << "\n";
    const auto t0 = Clock::now();
    Outcome o{false, ""};
    try {
      o = checks[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    out.push_back({i + 1, names[i], o.passed, o.detail, seconds_since(t0)});
  }
  return out;
}

std::string format_results(const std::vector<PropertyResult>& results) {
  std::ostringstream os;
  for (const PropertyResult& r : results)
    os << (r.passed ? "[PASS] " : "[FAIL] ") << std::setw(2) << r.id << " " << std::left
       << std::setw(26) << r.name << std::right << r.detail << " (" << std::fixed
       << std::setprecision(1) << r.seconds << " s)" << std::defaultfloat << "\n";
  return os.str();
}

std::vector<std::string> check_run_directory(const std::filesystem::path& dir) {
  std::vector<std::string> problems;
  auto need = [&](const char* name, const std::function<void(const std::filesystem::path&)>& parse) {
    const auto path = dir / name;
    if (!std::filesystem::exists(path)) {
      problems.push_back(std::string("missing ") + name);
      return;
    }
    try {
      parse(path);
    } catch (const std::exception& e) {
      problems.push_back(std::string(name) + ": " + e.what());
    }
  };
  need("config.ini", [](const auto& p) { load_config(p); });
  need("setup.snap", [](const auto& p) {
    if (read_snapshot(p).header.kind != "setup") throw FormatError("kind is not setup");
  });
  need("ledger.jsonl", [](const auto& p) {
    if (read_ledger(p).empty()) throw FormatError("empty ledger");
  });
  need("monitor.json", [](const auto& p) {
    std::ifstream in(p);
    const nlohmann::json j = nlohmann::json::parse(in);
    if (!j.contains("checks") || !j.contains("fits")) throw FormatError("missing sections");
  });
  need("phi_final.snap", [](const auto& p) {
    if (read_snapshot(p).header.kind != "phi") throw FormatError("kind is not phi");
  });
  return problems;
}

}  // namespace jflow
