// jflow: run, verify and report on flow experiments.
//
// Exit codes: 0 ok, 1 bad config / invalid setup / malformed input,
// 2 monitor or suite violations, 3 solver errors.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "jflow/config.hpp"
#include "jflow/cone.hpp"
#include "jflow/flow.hpp"
#include "jflow/io.hpp"
#include "jflow/parallel.hpp"
#include "jflow/stationary.hpp"
#include "jflow/verify.hpp"

namespace fs = std::filesystem;
using namespace jflow;

namespace {

constexpr int kOk = 0;
constexpr int kInput = 1;
constexpr int kViolation = 2;
constexpr int kSolver = 3;

void apply_threads(std::optional<int> flag) {
  int threads = 1;
  if (flag) {
    threads = *flag;
  } else if (const char* env = std::getenv("JFLOW_THREADS")) {
    try {
      threads = std::stoi(env);
    } catch (const std::exception&) {
      std::cerr << "warning: ignoring JFLOW_THREADS='" << env << "'\n";
    }
  }
  set_thread_count(std::max(1, threads));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) throw FormatError("cannot write " + path.string());
}

int cmd_run(const std::string& config_path, const std::optional<std::string>& out_flag,
            const std::optional<std::uint64_t>& seed_flag) {
  RunConfig cfg;
  ScenarioSpec spec;
  try {
    cfg = load_config(config_path);
    if (seed_flag) cfg.seed = *seed_flag;
    if (out_flag) cfg.out_dir = *out_flag;
    validate_config(cfg);
    spec = resolve_scenario(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kInput;
  }

  std::optional<GeometrySetup> setup;
  double calibration = 1.0;
  try {
    if (spec.target == ConeClass::kBoundary) {
      CalibratedScenario cal = calibrate_boundary_scenario(spec);
      spec = cal.spec;
      calibration = cal.factor;
      setup.emplace(std::move(cal.setup));
    } else {
      setup.emplace(build_scenario(spec));
    }
  } catch (const CalibrationError& e) {
    std::cerr << "calibration failed: " << e.what() << "\n";
    return kSolver;
  } catch (const std::exception& e) {
    std::cerr << "invalid setup: " << e.what() << "\n";
    return kInput;
  }
  const ConeReport cone = cone_condition(setup->chi(), setup->omega(), setup->m(), setup->c());

  std::optional<EllipticSolution> newton;
  FlowConfig fcfg = flow_config(cfg);
  try {
    if (cfg.stationary) {
      newton = solve_elliptic(*setup, ScalarField(setup->grid()), newton_options(cfg));
      fcfg.psi = newton->psi;
    }
  } catch (const NonconvergenceError& e) {
    std::cerr << "stationary solver failed: " << e.what() << " (residual " << e.residual()
              << ")\n";
    return kSolver;
  }

  const ScalarField phi0 = scenario_phi0(spec);
  std::optional<RunResult> result;
  try {
    result = run(*setup, phi0, fcfg);
  } catch (const PreconditionError& e) {
    std::cerr << "invalid setup: " << e.what() << "\n";
    return kInput;
  } catch (const StiffnessError& e) {
    std::cerr << "flow failed at t = " << e.last_state().t << ": " << e.what() << "\n";
    return kSolver;
  }

  const fs::path out = cfg.out_dir;
  try {
    fs::create_directories(out);
    write_text(out / "config.ini", serialize_config(cfg));

    SnapshotHeader h;
    h.n = setup->n();
    h.m = setup->m();
    h.points = setup->grid().points_per_axis();
    h.c = setup->c();
    h.kind = "setup";
    h.arrays = {"chi", "chi_tilde", "omega"};
    write_snapshot(out / "setup.snap", h, {},
                   {&setup->chi(), &setup->chi_tilde(), &setup->omega()});

    write_ledger(out / "ledger.jsonl", ledger_rows(*result));

    nlohmann::json mon = nlohmann::json::parse(
        monitor_json(result->monitor, result->converged, result->steps));
    mon["scenario"] = {{"name", spec.name},
                       {"c", setup->c()},
                       {"cone", to_string(cone.classification)},
                       {"cone_min_kappa", cone.global_min},
                       {"calibration_factor", calibration},
                       {"mask_points", result->mask.count()}};
    if (newton) {
      const double jn0 = j_functional(setup->n(), phi0, *setup);
      const FlowLimitComparison cmp =
          compare_flow_limit(result->final_state.phi, *newton, *setup, result->mask, jn0);
      mon["stationary"] = {{"residual", newton->residual_norm},
                           {"iterations", newton->newton_iterations},
                           {"conditioning", newton->linearization_conditioning},
                           {"spread", cmp.spread},
                           {"shift", cmp.shift},
                           {"sup_difference", cmp.sup_difference}};
    }
    write_text(out / "monitor.json", mon.dump(2) + "\n");

    h.kind = "phi";
    h.t = result->final_state.t;
    h.arrays = {"phi"};
    write_snapshot(out / "phi_final.snap", h, {&result->final_state.phi}, {});
    if (newton) {
      h.kind = "psi";
      h.t = 0.0;
      h.arrays = {"psi"};
      write_snapshot(out / "psi.snap", h, {&newton->psi}, {});
    }
  } catch (const std::exception& e) {
    std::cerr << "cannot write outputs: " << e.what() << "\n";
    return kInput;
  }

  std::cout << spec.name << ": c = " << setup->c() << ", t = " << result->final_state.t
            << ", steps " << result->steps << ", converged "
            << (result->converged ? "yes" : "no") << ", records "
            << result->trajectory.records.size() << "\n";
  if (result->monitor.any_violation()) {
    for (const MonitorCheck& c : result->monitor.checks)
      if (c.enforced && c.violated())
        std::cout << "violation: " << c.name << " (worst margin " << c.worst() << ")\n";
    return kViolation;
  }
  return kOk;
}

int cmd_verify(const std::string& target) {
  VerifyOptions options;
  options.log = &std::cerr;
  if (target != "all") {
    if (fs::is_directory(target)) {
      const auto problems = check_run_directory(target);
      for (const std::string& p : problems) std::cout << "[FAIL] " << p << "\n";
      if (problems.empty()) std::cout << "[PASS] run directory " << target << " is complete\n";
      return problems.empty() ? kOk : kViolation;
    }
    try {
      options.properties = load_config(target).properties;
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kInput;
    }
  }
  std::vector<PropertyResult> results;
  try {
    results = run_verify(options);
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  }
  std::cout << format_results(results);
  for (const PropertyResult& r : results)
    if (!r.passed) return kViolation;
  return kOk;
}

int cmd_report(const std::string& ledger_path, const std::optional<std::string>& out_flag) {
  std::vector<LedgerRow> rows;
  try {
    rows = read_ledger(ledger_path);
  } catch (const FormatError& e) {
    std::cerr << "malformed ledger " << ledger_path << " at byte " << e.offset() << ": "
              << e.what() << "\n";
    return kInput;
  }
  const fs::path out = out_flag ? fs::path(*out_flag) : fs::path(ledger_path).parent_path();
  try {
    if (!out.empty()) fs::create_directories(out);
    write_text(out / "ledger.csv", ledger_csv(rows));
    write_text(out / "ledger.plot.dat", ledger_plot_data(rows));
  } catch (const std::exception& e) {
    std::cerr << "cannot write report: " << e.what() << "\n";
    return kInput;
  }
  std::cout << rows.size() << " rows -> " << (out / "ledger.csv").string() << ", "
            << (out / "ledger.plot.dat").string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"Numerical laboratory for J-type flows on the flat torus"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;

  CLI::App* run = app.add_subcommand("run", "Run one configured experiment");
  run->add_option("--config", config_path, "Config file")->required();
  run->add_option("--out", out_dir, "Output directory (overrides output.dir)");
  run->add_option("--threads", threads, "Worker threads (fallback: JFLOW_THREADS)");
  run->add_option("--seed", seed, "Scenario seed (overrides run.seed)");

  std::string target = "all";
  std::string fault;
  CLI::App* verify = app.add_subcommand("verify", "Run the property suite or check a run directory");
  verify->add_option("target", target, "all, a config file with [verify] properties, or a run directory");
  verify->add_option("--config", target, "Same as the positional target");
  verify->add_option("--threads", threads, "Worker threads (fallback: JFLOW_THREADS)");
  verify->add_option("--inject-fault", fault, "Deliberate defect for detector checks")
      ->check(CLI::IsMember({"elem_sym_partial_sign"}))
      ->group("");

  std::string ledger;
  CLI::App* report = app.add_subcommand("report", "Export a ledger as CSV and plot data");
  report->add_option("ledger", ledger, "ledger.jsonl")->required();
  report->add_option("--out", out_dir, "Output directory (default: next to the ledger)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }

  apply_threads(threads);
  try {
    if (*run) return cmd_run(config_path, out_dir, seed);
    if (*verify) {
      if (!fault.empty()) fault::inject(fault::Fault::kElemSymPartialSign);
      return cmd_verify(target);
    }
    return cmd_report(ledger, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolver;
  }
}
