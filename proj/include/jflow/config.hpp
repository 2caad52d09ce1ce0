#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "jflow/cone.hpp"
#include "jflow/flow.hpp"
#include "jflow/stationary.hpp"

namespace jflow {

/// Optional edits applied on top of a named scenario ([scenario] section).
struct ScenarioOverrides {
  std::optional<std::vector<double>> chi_base;
  std::optional<std::vector<TrigMode>> chi_modes;
  std::optional<std::vector<double>> tilde_base;
  std::optional<std::vector<TrigMode>> tilde_modes;
  std::optional<std::vector<double>> omega_diag;
  std::optional<double> scale;
  std::optional<std::vector<PotentialMode>> phi0_modes;
  std::optional<int> random_modes;
  std::optional<double> random_amplitude;
  std::optional<ScenarioFamily> family;
  std::optional<std::string> target;  // "strict", "boundary", "violated" or "none"
  std::optional<bool> require_big;
  std::optional<DiffScheme> scheme;

  bool operator==(const ScenarioOverrides&) const = default;
};

/// Everything one `run` needs. Sections of the text format in brackets.
struct RunConfig {
  // [run]
  std::string scenario = "strict";
  std::optional<std::uint64_t> seed;
  // [grid]
  std::optional<int> points;
  std::optional<int> n;
  std::optional<int> m;
  // [flow]
  Integrator method = Integrator::kRk4;
  double dt0 = 0.0;
  double t_max = 10.0;
  double tol_converge = 1e-8;
  double record_interval = 0.1;
  double cfl = 0.9;
  double dt_growth = 1.5;
  // [monitor]
  double slack_max_principle = 1e-6;
  double slack_sign = 1e-8;
  double slack_c0 = 1e-6;
  double mask_delta = 1e-3;
  // [stationary]
  bool stationary = true;
  double newton_tol = 1e-10;
  int newton_max_iterations = 50;
  // [output]
  std::string out_dir = "run";
  bool keep_fields = false;
  // [verify]
  std::vector<std::string> properties;  // empty: the whole suite
  // [scenario]
  ScenarioOverrides overrides;

  bool operator==(const RunConfig&) const = default;
};

/// Parses the flat sectioned key = value format. Throws ConfigError naming the
/// line and the "section.key" field.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical text; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

/// Range checks (N even and >= 4, 1 <= m < n <= 4, tolerances > 0, ...).
void validate_config(const RunConfig& config);

/// Named scenario with the seed, grid and [scenario] edits applied.
ScenarioSpec resolve_scenario(const RunConfig& config);

FlowConfig flow_config(const RunConfig& config);
NewtonOptions newton_options(const RunConfig& config);

const char* to_string(Integrator method);
const char* to_string(ScenarioFamily family);
const char* to_string(DiffScheme scheme);

}  // namespace jflow
