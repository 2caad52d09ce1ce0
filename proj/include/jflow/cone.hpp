#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jflow/setup.hpp"

namespace jflow {

enum class ConeClass { kStrict, kBoundary, kViolated };

const char* to_string(ConeClass c);
ConeClass cone_class_from_string(const std::string& s);

inline constexpr double kToleranceBoundary = 1e-9;

/// kappa_i = c e_{n-1}(mu minus i) - (m!(n-m)!/(n-1)!) e_{m-1}(mu minus i) at
/// every point, mu = eigenvalues of chi relative to omega (ascending).
struct ConeReport {
  PeriodicGrid grid;
  Eigen::MatrixXd kappa;  // n x P
  double global_min = 0.0;
  ConeClass classification = ConeClass::kStrict;
  Index argmin_point = 0;
  int argmin_direction = 0;
};

/// Checks the cone condition for the representative chi (not its class).
ConeReport cone_condition(const SymFormField& chi, const SymFormField& omega, int m,
                          double c, double tol_boundary = kToleranceBoundary);

/// Compares cone_form_coefficients with the mixed-discriminant evaluation of
/// c chi^(n-1) - m chi^(m-1) ^ omega^(n-m) against omega v v^T omega on random
/// points. Throws ScenarioError on a mismatch above 1e-10 relative.
void check_cone_normalization(int samples = 100, std::uint64_t seed = 7);

/// amplitude * sin^2(pi (x_axis - shift)) added to the (axis, axis) entry.
struct TrigMode {
  int axis = 0;
  double amplitude = 0.0;
  double shift = 0.0;

  bool operator==(const TrigMode&) const = default;
};

/// amplitude * cos(2 pi (k . x) + phase).
struct PotentialMode {
  std::vector<int> k;
  double amplitude = 0.0;
  double phase = 0.0;

  bool operator==(const PotentialMode&) const = default;
};

enum class ScenarioFamily { kPerturbation, kConformal };

/// Diagonal constant-plus-trigonometric forms on the flat torus:
///   chi       = scale * (diag(chi_base) + sum of chi_modes)
///   chi_tilde = scale * (diag(tilde_base) + sum of tilde_modes)
/// Each mode is realized as a constant plus the complex Hessian of a cosine
/// potential, so both forms are closed.
struct ScenarioSpec {
  std::string name = "custom";
  int n = 2;
  int m = 1;
  int points = 64;
  std::vector<double> chi_base;    // empty: all ones
  std::vector<TrigMode> chi_modes;
  std::vector<double> tilde_base;  // empty: all zeros
  std::vector<TrigMode> tilde_modes;
  std::vector<double> omega_diag;  // empty: identity
  double scale = 1.0;
  std::vector<PotentialMode> phi0_modes;
  int random_modes = 0;            // extra seeded modes for phi0
  double random_amplitude = 0.0;
  std::uint64_t seed = 1;
  ScenarioFamily family = ScenarioFamily::kPerturbation;
  std::optional<ConeClass> target;
  bool require_big = true;
  DiffScheme scheme = DiffScheme::kSpectral;
};

/// The named scenarios: trivial, strict, strict3, strict3m2, boundary,
/// boundary-compound, boundary-disjoint, degenerate.
ScenarioSpec named_scenario(const std::string& name);
std::vector<std::string> scenario_names();

/// chi_tilde of the spec, built from its base and modes (before joint scaling
/// is applied the result is multiplied by spec.scale).
SymFormField scenario_chi(const ScenarioSpec& spec);
SymFormField scenario_chi_tilde(const ScenarioSpec& spec);

/// Builds the setup and, when the spec names a target class, checks it.
GeometrySetup build_scenario(const ScenarioSpec& spec);

/// Initial potential phi0 of the spec.
ScalarField scenario_phi0(const ScenarioSpec& spec);

/// The calibrated spec and its setup.
struct CalibratedScenario {
  ScenarioSpec spec;
  double factor = 1.0;  // multiplier applied to the family parameter
  GeometrySetup setup;
  ConeReport report;
};

/// Bisects the family parameter (mode amplitudes of chi for the perturbation
/// family, the scale of chi for the conformal family) until the cone
/// condition sits on its boundary, recomputing c at every trial.
CalibratedScenario calibrate_boundary_scenario(const ScenarioSpec& spec);

/// Setup whose chi_tilde is semipositive and degenerate on a lower-dimensional
/// set. Throws ScenarioError if semipositivity fails by more than 1e-12 or the
/// form is not big.
GeometrySetup degenerate_chi_tilde_scenario(const ScenarioSpec& spec);

}  // namespace jflow
