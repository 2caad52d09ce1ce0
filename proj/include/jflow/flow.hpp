#pragma once

#include <optional>
#include <string>
#include <vector>

#include "jflow/functionals.hpp"
#include "jflow/state.hpp"

namespace jflow {

enum class Integrator { kExplicitEuler, kRk4 };

/// Thrown when the admissibility guard exhausts its halvings. Carries the last
/// admissible state.
class StiffnessError : public std::runtime_error {
 public:
  StiffnessError(const std::string& what, FlowState last)
      : std::runtime_error(what), last_(std::move(last)) {}
  const FlowState& last_state() const { return last_; }

 private:
  FlowState last_;
};

struct StepOptions {
  double safety = 0.5;   // min eigenvalue may not drop below safety * previous
  int max_halvings = 30;
};

struct StepStats {
  double dt_accepted = 0.0;
  int halvings = 0;
};

/// Advances state by one explicit step, halving dt until the new state is
/// admissible and its eigenvalue floor holds.
FlowState step(const FlowState& state, const GeometrySetup& setup, double dt,
               Integrator method, const StepOptions& options = {},
               StepStats* stats = nullptr);

/// Largest dt inside the explicit stability region of `method` for the
/// frozen-coefficient linearization at `state`, times cfl.
double stable_dt(const FlowState& state, Integrator method, double cfl);

/// Upper convex hull of points (s, y), ascending s.
struct Hull {
  std::vector<double> s;
  std::vector<double> y;

  static Hull of(std::vector<std::pair<double, double>> points);
  static Hull merge(const Hull& a, const Hull& b);
  bool empty() const { return s.empty(); }
};

/// Per-record scalar diagnostics.
struct TrajectoryRecord {
  double t = 0.0;
  double dt = 0.0;
  double sup_dphidt = 0.0;
  double inf_dphidt = 0.0;
  double mask_sup_abs_dphidt = 0.0;
  double ratio_min = 0.0;
  double ratio_max = 0.0;
  double phi_min = 0.0;
  double phi_max = 0.0;
  double w_max = 0.0;
  double mask_w_max = 0.0;
  double min_eigenvalue = 0.0;
  double rhs_mean_residual = 0.0;  // int rhs X^n / int |rhs| X^n
  Hull global_samples;             // (phi + c t, log w) over the grid
  Hull mask_samples;               // same, restricted to the mask
  Hull rho_samples;                // (phi - rho, log w) on the mask
  double global_peak_s = 0.0;      // s at the largest w, per sample set
  double mask_peak_s = 0.0;
  double rho_peak_s = 0.0;
  std::optional<ScalarField> phi;  // kept when requested
};

struct Trajectory {
  double c = 0.0;
  bool has_rho = false;
  std::vector<TrajectoryRecord> records;
};

struct FlowConfig {
  Integrator method = Integrator::kRk4;
  double dt0 = 0.0;  // 0: 0.1 h^2 lambda_min^2
  double t_max = 10.0;
  double tol_converge = 1e-8;
  double record_interval = 0.1;
  double cfl = 0.9;
  double dt_growth = 1.5;
  double mask_delta = 1e-3;
  StepOptions step;
  double slack_max_principle = 1e-6;
  double slack_sign = 1e-8;
  double slack_c0 = 1e-6;
  bool keep_fields = false;
  std::optional<ScalarField> psi;  // stationary reference for the C0 monitor
  std::optional<ScalarField> rho;  // surrogate for the interior second-order bound
};

/// One named inequality tracked over the records. margin >= 0 means the
/// inequality holds exactly; it is violated when some margin < -slack.
struct MonitorCheck {
  std::string name;
  double slack = 0.0;
  std::vector<double> margins;
  bool enforced = true;  // informational checks never count as violations

  double worst() const;
  bool violated() const { return worst() < -slack; }
  bool violated_at(std::size_t r) const { return margins[r] < -slack; }
};

/// Fitted w <= C exp(A s) over a run, with the fits of every prefix in the
/// final quarter used to judge stabilization.
struct ExponentialFit {
  std::string name;
  double log_c = 0.0;
  double a = 0.0;
  bool stabilized = false;
  double c_relative_change = 0.0;
  double a_relative_change = 0.0;
};

struct MonitorReport {
  std::vector<MonitorCheck> checks;
  std::vector<ExponentialFit> fits;

  bool any_violation() const;
  const MonitorCheck* check(const std::string& name) const;
  const ExponentialFit* fit(const std::string& name) const;
};

/// Envelope of dphi/dt, envelope of the volume-ratio quotient (relative
/// slack) and the sign bracket sup >= -slack_sign, inf <= slack_sign.
MonitorReport monitor_max_principle(const Trajectory& trajectory, double slack,
                                    double slack_sign = 1e-8);

/// Smallest (C, A) with w <= C exp(A (phi + c t)) over the run, plus the masked
/// variants: (phi + c t) on the mask and, with rho, (phi - rho) on the mask.
MonitorReport second_order_monitor(const Trajectory& trajectory);

/// Enforced: max phi <= max phi_0 + |psi|_inf ("c0_upper") and
/// min phi >= min phi_0 - |psi|_inf ("c0_lower_psi"). The sharper
/// min phi >= min phi_0 ("c0_lower") is reported but not enforced: it fails
/// whenever psi is not constant.
MonitorReport c0_monitor(const Trajectory& trajectory, const ScalarField& psi,
                         double slack);

/// Fit of w <= C exp(A s) to one hull, and the minimizing rule used by the
/// monitor: the L1 gap at the per-record peaks, A >= 0.
ExponentialFit fit_exponential(const Hull& hull, double mean_peak_s);

struct RunResult {
  Trajectory trajectory;
  FunctionalLedger ledger;
  MonitorReport monitor;
  std::vector<std::vector<std::string>> violations;  // per record
  FlowState final_state;
  AmpMask mask;
  bool converged = false;
  long steps = 0;
};

/// Integrates from phi0 until t_max or convergence on the mask, recording
/// every record_interval. Throws PreconditionError for inadmissible phi0 and
/// propagates StiffnessError.
RunResult run(const GeometrySetup& setup, const ScalarField& phi0,
              const FlowConfig& config);

}  // namespace jflow
