#include "jflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "jflow/parallel.hpp"

namespace jflow {

namespace {

constexpr double kRk4StabilityLimit = 2.78;
constexpr double kEulerStabilityLimit = 2.0;

bool rhs_at(const GeometrySetup& setup, const Eigen::VectorXd& phi, Eigen::VectorXd& out) {
  if (!phi.allFinite()) return false;
  const SymFormField x = total_form(setup, ScalarField(setup.grid(), phi));
  const Eigen::MatrixXd e = relative_elem_sym(x, setup.frame());
  Index bad = 0;
  return detail::rhs_from_elem_sym(e, setup.n(), setup.m(), setup.c(), out, bad);
}

bool advance(const GeometrySetup& setup, const FlowState& s, double dt,
             Integrator method, Eigen::VectorXd& next) {
  const Eigen::VectorXd& phi = s.phi.data();
  const Eigen::VectorXd& k1 = s.dphi_dt.data();
  if (method == Integrator::kExplicitEuler) {
    next = phi + dt * k1;
    return next.allFinite();
  }
  Eigen::VectorXd k2, k3, k4;
  if (!rhs_at(setup, phi + 0.5 * dt * k1, k2)) return false;
  if (!rhs_at(setup, phi + 0.5 * dt * k2, k3)) return false;
  if (!rhs_at(setup, phi + dt * k3, k4)) return false;
  next = phi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  return next.allFinite();
}

Hull upper_hull_sorted(const std::vector<std::pair<double, double>>& pts) {
  Hull h;
  for (const auto& [s, y] : pts) {
    if (!h.s.empty() && h.s.back() == s) {
      if (y <= h.y.back()) continue;
      h.s.pop_back();
      h.y.pop_back();
    }
    while (h.s.size() >= 2) {
      const std::size_t k = h.s.size();
      const double cross = (h.s[k - 1] - h.s[k - 2]) * (y - h.y[k - 2]) -
                           (h.y[k - 1] - h.y[k - 2]) * (s - h.s[k - 2]);
      if (cross < 0.0) break;
      h.s.pop_back();
      h.y.pop_back();
    }
    h.s.push_back(s);
    h.y.push_back(y);
  }
  return h;
}

double peak_s(const Hull& h) {
  if (h.empty()) return 0.0;
  const auto it = std::max_element(h.y.begin(), h.y.end());
  return h.s[static_cast<std::size_t>(it - h.y.begin())];
}

double relative_change(double lo, double hi) {
  const double scale = std::max(std::abs(lo), std::abs(hi));
  return scale == 0.0 ? 0.0 : (hi - lo) / scale;
}

TrajectoryRecord make_record(const FlowState& s, const GeometrySetup& setup,
                             const AmpMask& mask, const std::optional<ScalarField>& rho,
                             double dt, bool keep_field) {
  TrajectoryRecord r;
  r.t = s.t;
  r.dt = dt;
  const Eigen::VectorXd& v = s.dphi_dt.data();
  r.sup_dphidt = v.maxCoeff();
  r.inf_dphidt = v.minCoeff();
  const Eigen::VectorXd q = volume_ratio(s, setup);
  r.ratio_min = q.minCoeff();
  r.ratio_max = q.maxCoeff();
  r.phi_min = s.phi.min();
  r.phi_max = s.phi.max();
  r.w_max = s.w.max();
  r.min_eigenvalue = s.min_eigenvalue;

  const bool use_mask = !mask.empty();
  const Index size = v.size();
  double sup_abs = 0.0;
  double mask_w = 0.0;
  std::vector<std::pair<double, double>> global, masked, shifted;
  global.reserve(static_cast<std::size_t>(size));
  for (Index p = 0; p < size; ++p) {
    const double logw = std::log(s.w[p]);
    const double sp = s.phi[p] + setup.c() * s.t;
    global.emplace_back(sp, logw);
    if (use_mask && !mask.mask[static_cast<std::size_t>(p)]) continue;
    sup_abs = std::max(sup_abs, std::abs(v(p)));
    mask_w = std::max(mask_w, s.w[p]);
    masked.emplace_back(sp, logw);
    if (rho) shifted.emplace_back(s.phi[p] - (*rho)[p], logw);
  }
  r.mask_sup_abs_dphidt = sup_abs;
  r.mask_w_max = mask_w;
  r.global_samples = Hull::of(std::move(global));
  r.mask_samples = Hull::of(std::move(masked));
  r.global_peak_s = peak_s(r.global_samples);
  r.mask_peak_s = peak_s(r.mask_samples);
  if (rho) {
    r.rho_samples = Hull::of(std::move(shifted));
    r.rho_peak_s = peak_s(r.rho_samples);
  }

  Eigen::VectorXd weighted(size), absolute(size);
  for (Index p = 0; p < size; ++p) {
    const double vol = s.elem_sym(setup.n(), p) * setup.frame().det(p);
    weighted(p) = v(p) * vol;
    absolute(p) = std::abs(v(p)) * vol;
  }
  const double denom = pairwise_sum(absolute);
  r.rhs_mean_residual = denom > 0.0 ? pairwise_sum(weighted) / denom : 0.0;
  if (keep_field) r.phi = s.phi;
  return r;
}

double mask_sup_abs(const FlowState& s, const AmpMask& mask) {
  const Eigen::VectorXd& v = s.dphi_dt.data();
  if (mask.empty()) return v.cwiseAbs().maxCoeff();
  double sup = 0.0;
  for (Index p = 0; p < v.size(); ++p)
    if (mask.mask[static_cast<std::size_t>(p)]) sup = std::max(sup, std::abs(v(p)));
  return sup;
}

ExponentialFit fit_series(const std::string& name, const Trajectory& tr,
                          Hull TrajectoryRecord::*samples,
                          double TrajectoryRecord::*peak) {
  const std::size_t count = tr.records.size();
  const std::size_t first = count < 4 ? count - 1 : (3 * count) / 4;
  Hull merged;
  double peak_sum = 0.0;
  double lo_c = std::numeric_limits<double>::infinity(), hi_c = -lo_c;
  double lo_a = lo_c, hi_a = -lo_c;
  ExponentialFit last;
  for (std::size_t r = 0; r < count; ++r) {
    merged = Hull::merge(merged, tr.records[r].*samples);
    peak_sum += tr.records[r].*peak;
    if (r < first || merged.empty()) continue;
    last = fit_exponential(merged, peak_sum / static_cast<double>(r + 1));
    const double cval = std::exp(last.log_c);
    lo_c = std::min(lo_c, cval);
    hi_c = std::max(hi_c, cval);
    lo_a = std::min(lo_a, last.a);
    hi_a = std::max(hi_a, last.a);
  }
  last.name = name;
  if (merged.empty()) return last;
  last.c_relative_change = relative_change(lo_c, hi_c);
  last.a_relative_change = relative_change(lo_a, hi_a);
  last.stabilized = last.c_relative_change < 0.01 && last.a_relative_change < 0.01;
  return last;
}

}  // namespace

FlowState step(const FlowState& state, const GeometrySetup& setup, double dt,
               Integrator method, const StepOptions& options, StepStats* stats) {
  if (!(dt > 0.0)) throw ArgumentError("step: dt must be positive");
  for (int halvings = 0; halvings <= options.max_halvings; ++halvings, dt *= 0.5) {
    Eigen::VectorXd next;
    if (!advance(setup, state, dt, method, next)) continue;
    try {
      FlowState s = make_state(setup, ScalarField(setup.grid(), std::move(next)),
                               state.t + dt);
      if (s.min_eigenvalue < options.safety * state.min_eigenvalue) continue;
      if (stats) *stats = {dt, halvings};
      return s;
    } catch (const GeometryError&) {
    }
  }
  std::ostringstream os;
  os << "step: admissibility guard exhausted " << options.max_halvings
     << " halvings at t = " << state.t;
  throw StiffnessError(os.str(), state);
}

double stable_dt(const FlowState& state, Integrator method, double cfl) {
  const double limit =
      method == Integrator::kRk4 ? kRk4StabilityLimit : kEulerStabilityLimit;
  if (!(state.stiffness > 0.0)) return std::numeric_limits<double>::infinity();
  return cfl * limit / state.stiffness;
}

Hull Hull::of(std::vector<std::pair<double, double>> points) {
  std::sort(points.begin(), points.end());
  return upper_hull_sorted(points);
}

Hull Hull::merge(const Hull& a, const Hull& b) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(a.s.size() + b.s.size());
  for (std::size_t k = 0; k < a.s.size(); ++k) pts.emplace_back(a.s[k], a.y[k]);
  for (std::size_t k = 0; k < b.s.size(); ++k) pts.emplace_back(b.s[k], b.y[k]);
  return of(std::move(pts));
}

ExponentialFit fit_exponential(const Hull& hull, double mean_peak_s) {
  if (hull.empty()) throw ArgumentError("fit_exponential: no samples");
  // Objective in A: R (max_k (y_k - A s_k) + A mean_peak_s). Its slope is
  // R (mean_peak_s - s_active); walk left along the hull until it turns >= 0.
  std::size_t k = 0;
  for (std::size_t j = 1; j < hull.y.size(); ++j)
    if (hull.y[j] > hull.y[k]) k = j;
  double a = 0.0;
  while (hull.s[k] > mean_peak_s && k > 0) {
    a = (hull.y[k] - hull.y[k - 1]) / (hull.s[k] - hull.s[k - 1]);
    --k;
  }
  ExponentialFit fit;
  fit.a = a;
  fit.log_c = hull.y[k] - a * hull.s[k];
  return fit;
}

double MonitorCheck::worst() const {
  double w = std::numeric_limits<double>::infinity();
  for (double m : margins) w = std::min(w, m);
  return w;
}

bool MonitorReport::any_violation() const {
  return std::any_of(checks.begin(), checks.end(),
                     [](const MonitorCheck& c) { return c.enforced && c.violated(); });
}

const MonitorCheck* MonitorReport::check(const std::string& name) const {
  for (const MonitorCheck& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

const ExponentialFit* MonitorReport::fit(const std::string& name) const {
  for (const ExponentialFit& f : fits)
    if (f.name == name) return &f;
  return nullptr;
}

MonitorReport monitor_max_principle(const Trajectory& tr, double slack,
                                    double slack_sign) {
  if (tr.records.empty()) throw ArgumentError("monitor_max_principle: empty trajectory");
  const TrajectoryRecord& r0 = tr.records.front();
  MonitorCheck up{"dphidt_upper", slack, {}}, down{"dphidt_lower", slack, {}};
  MonitorCheck qup{"ratio_upper", slack, {}}, qdown{"ratio_lower", slack, {}};
  MonitorCheck sup{"sign_sup", slack_sign, {}}, inf{"sign_inf", slack_sign, {}};
  for (const TrajectoryRecord& r : tr.records) {
    up.margins.push_back(r0.sup_dphidt - r.sup_dphidt);
    down.margins.push_back(r.inf_dphidt - r0.inf_dphidt);
    qup.margins.push_back((r0.ratio_max - r.ratio_max) / std::abs(r0.ratio_max));
    qdown.margins.push_back((r.ratio_min - r0.ratio_min) / std::abs(r0.ratio_min));
    sup.margins.push_back(r.sup_dphidt);
    inf.margins.push_back(-r.inf_dphidt);
  }
  MonitorReport rep;
  rep.checks = {up, down, qup, qdown, sup, inf};
  return rep;
}

MonitorReport second_order_monitor(const Trajectory& tr) {
  if (tr.records.empty()) throw ArgumentError("second_order_monitor: empty trajectory");
  MonitorReport rep;
  rep.fits.push_back(fit_series("global", tr, &TrajectoryRecord::global_samples,
                                &TrajectoryRecord::global_peak_s));
  rep.fits.push_back(fit_series("mask", tr, &TrajectoryRecord::mask_samples,
                                &TrajectoryRecord::mask_peak_s));
  if (tr.has_rho)
    rep.fits.push_back(fit_series("rho", tr, &TrajectoryRecord::rho_samples,
                                  &TrajectoryRecord::rho_peak_s));
  return rep;
}

MonitorReport c0_monitor(const Trajectory& tr, const ScalarField& psi, double slack) {
  if (tr.records.empty()) throw ArgumentError("c0_monitor: empty trajectory");
  const double norm = psi.data().cwiseAbs().maxCoeff();
  const TrajectoryRecord& r0 = tr.records.front();
  MonitorCheck upper{"c0_upper", slack, {}}, lower{"c0_lower", slack, {}, false};
  MonitorCheck lower_psi{"c0_lower_psi", slack, {}};
  for (const TrajectoryRecord& r : tr.records) {
    upper.margins.push_back(r0.phi_max + norm - r.phi_max);
    lower.margins.push_back(r.phi_min - r0.phi_min);
    lower_psi.margins.push_back(r.phi_min - (r0.phi_min - norm));
  }
  MonitorReport rep;
  rep.checks = {upper, lower, lower_psi};
  return rep;
}

RunResult run(const GeometrySetup& setup, const ScalarField& phi0,
              const FlowConfig& config) {
  if (!(config.t_max >= 0.0) || !(config.record_interval > 0.0) ||
      !(config.tol_converge > 0.0) || !(config.cfl > 0.0) || config.dt0 < 0.0)
    throw ArgumentError("run: invalid flow configuration");
  if (config.rho && !(config.rho->grid() == setup.grid()))
    throw ArgumentError("run: rho lives on a different grid");

  std::optional<FlowState> start;
  try {
    start = make_state(setup, phi0, 0.0);
  } catch (const GeometryError& e) {
    throw PreconditionError(std::string("run: initial potential is not admissible: ") +
                            e.what());
  }
  RunResult out{{setup.c(), config.rho.has_value(), {}}, {}, {}, {}, *start,
                amp_locus(setup.chi_tilde(), setup.omega(), config.mask_delta)};
  FlowState& s = out.final_state;

  double last_dt = 0.0;
  auto record = [&]() {
    out.trajectory.records.push_back(
        make_record(s, setup, out.mask, config.rho, last_dt, config.keep_fields));
    const FunctionalValues f = evaluate_functionals(s.phi, setup);
    out.ledger.append({s.t, f.j, f.combined, dissipation(s, setup), f.theorem_norm});
  };

  const double h = setup.grid().spacing();
  double dt = config.dt0 > 0.0 ? config.dt0
                               : 0.1 * h * h * s.min_eigenvalue * s.min_eigenvalue;
  record();
  out.converged = mask_sup_abs(s, out.mask) < config.tol_converge;
  long record_index = 1;
  while (!out.converged && s.t < config.t_max) {
    const double target =
        std::min(config.record_interval * static_cast<double>(record_index), config.t_max);
    double trial = std::min(dt, stable_dt(s, config.method, config.cfl));
    const bool clamped = s.t + trial >= target;
    if (clamped) trial = target - s.t;
    StepStats stats;
    s = step(s, setup, trial, config.method, config.step, &stats);
    ++out.steps;
    last_dt = stats.dt_accepted;
    if (clamped && stats.halvings == 0) s.t = target;
    if (stats.halvings > 0)
      dt = stats.dt_accepted;
    else if (!clamped)
      dt = trial * config.dt_growth;

    out.converged = mask_sup_abs(s, out.mask) < config.tol_converge;
    if (s.t >= target) {
      record();
      ++record_index;
    } else if (out.converged) {
      record();
    }
  }

  MonitorReport mp =
      monitor_max_principle(out.trajectory, config.slack_max_principle, config.slack_sign);
  MonitorReport so = second_order_monitor(out.trajectory);
  out.monitor.checks = mp.checks;
  out.monitor.fits = so.fits;
  if (config.psi) {
    MonitorReport c0 = c0_monitor(out.trajectory, *config.psi, config.slack_c0);
    out.monitor.checks.insert(out.monitor.checks.end(), c0.checks.begin(), c0.checks.end());
  }
  out.violations.assign(out.trajectory.records.size(), {});
  for (const MonitorCheck& c : out.monitor.checks) {
    if (!c.enforced) continue;
    for (std::size_t r = 0; r < c.margins.size(); ++r)
      if (c.violated_at(r)) out.violations[r].push_back(c.name);
  }
  return out;
}

}  // namespace jflow
