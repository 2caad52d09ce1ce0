#include "jflow/cone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>

#include "jflow/random.hpp"

namespace jflow {

namespace {

void check_normalization_once() {
  static std::once_flag flag;
  std::call_once(flag, [] { check_cone_normalization(); });
}

Eigen::MatrixXd diag_or(const std::vector<double>& d, int n, double fill) {
  Eigen::VectorXd v = Eigen::VectorXd::Constant(n, fill);
  if (!d.empty()) {
    if (static_cast<int>(d.size()) != n)
      throw ScenarioError("scenario: diagonal has the wrong length");
    for (int j = 0; j < n; ++j) v(j) = d[static_cast<std::size_t>(j)];
  }
  return v.asDiagonal();
}

// scale * (diag(base) + sum amp sin^2(pi (x_j - shift)) e_j e_j^T), realized as
// a constant plus the complex Hessian of a cosine potential:
//   amp sin^2(pi u) = amp/2 + (1/4) d^2/du^2 [amp/(2 pi^2) cos(2 pi u)].
SymFormField trig_form(const ScenarioSpec& spec, const std::vector<double>& base,
                       double fill, const std::vector<TrigMode>& modes) {
  const PeriodicGrid grid(spec.n, spec.points);
  Eigen::MatrixXd constant = diag_or(base, spec.n, fill);
  for (const TrigMode& mode : modes) {
    if (mode.axis < 0 || mode.axis >= spec.n)
      throw ScenarioError("scenario: mode axis out of range");
    constant(mode.axis, mode.axis) += 0.5 * mode.amplitude;
  }
  const double pi = std::numbers::pi;
  const ScalarField eta = ScalarField::from_function(grid, [&](const Eigen::VectorXd& x) {
    double v = 0.0;
    for (const TrigMode& mode : modes)
      v += mode.amplitude / (2.0 * pi * pi) * std::cos(2.0 * pi * (x(mode.axis) - mode.shift));
    return v;
  });
  return kahler_from_potential(spec.scale * constant, eta * spec.scale, spec.scheme);
}

SymFormField scenario_omega(const ScenarioSpec& spec) {
  const PeriodicGrid grid(spec.n, spec.points);
  return SymFormField::constant(grid, diag_or(spec.omega_diag, spec.n, 1.0));
}

ScenarioSpec scaled_family(const ScenarioSpec& spec, double factor) {
  ScenarioSpec s = spec;
  if (spec.family == ScenarioFamily::kPerturbation) {
    for (TrigMode& mode : s.chi_modes) mode.amplitude *= factor;
  } else {
    // chi -> factor * chi with chi_tilde fixed: fold factor into chi's data.
    const std::vector<double> base = s.chi_base.empty()
                                         ? std::vector<double>(static_cast<std::size_t>(s.n), 1.0)
                                         : s.chi_base;
    s.chi_base.clear();
    for (double b : base) s.chi_base.push_back(b * factor);
    for (TrigMode& mode : s.chi_modes) mode.amplitude *= factor;
  }
  return s;
}

SetupChecks checks_of(const ScenarioSpec& spec) {
  SetupChecks c;
  c.require_big = spec.require_big;
  return c;
}

}  // namespace

const char* to_string(ConeClass c) {
  switch (c) {
    case ConeClass::kStrict:
      return "strict";
    case ConeClass::kBoundary:
      return "boundary";
    case ConeClass::kViolated:
      return "violated";
  }
  return "?";
}

ConeClass cone_class_from_string(const std::string& s) {
  if (s == "strict") return ConeClass::kStrict;
  if (s == "boundary") return ConeClass::kBoundary;
  if (s == "violated") return ConeClass::kViolated;
  throw ArgumentError("unknown cone classification '" + s + "'");
}

ConeReport cone_condition(const SymFormField& chi, const SymFormField& omega, int m,
                          double c, double tol_boundary) {
  if (!(c > 0.0)) throw ArgumentError("cone_condition: c must be positive");
  const ReferenceFrame frame(omega);
  const EigenFrameField ef = relative_eigenframe(chi, frame);
  const int n = chi.dim();
  ConeReport rep{chi.grid(), Eigen::MatrixXd(n, chi.size()), 0.0, ConeClass::kStrict, 0, 0};
  double lo = std::numeric_limits<double>::infinity();
  for (Index p = 0; p < chi.size(); ++p) {
    const Eigen::VectorXd mu = ef.values.col(p);
    if (!(mu(0) > 0.0))
      throw GeometryError("cone_condition: chi is not positive definite", mu(0), p);
    rep.kappa.col(p) = cone_form_coefficients(mu, m, c);
    for (int i = 0; i < n; ++i)
      if (rep.kappa(i, p) < lo) {
        lo = rep.kappa(i, p);
        rep.argmin_point = p;
        rep.argmin_direction = i;
      }
  }
  rep.global_min = lo;
  if (lo > tol_boundary)
    rep.classification = ConeClass::kStrict;
  else if (lo >= -tol_boundary)
    rep.classification = ConeClass::kBoundary;
  else
    rep.classification = ConeClass::kViolated;
  return rep;
}

void check_cone_normalization(int samples, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> uniform(0.2, 3.0);
  for (int draw = 0; draw < samples; ++draw) {
    const int n = 2 + draw % 3;
    const int m = 1 + (draw / 3) % (n - 1);
    const double c = uniform(rng);
    const HermForm chi = random_pd_form(n, rng, 0.1, true);
    const HermForm omega = random_pd_form(n, rng, 0.5, true);
    const Eigen::MatrixXd w = omega.entries().real();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(chi.entries().real(), w);
    const Eigen::VectorXd kappa = cone_form_coefficients(es.eigenvalues(), m, c);
    const double det_omega = w.determinant();
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd v = es.eigenvectors().col(i);
      const HermForm f(Eigen::MatrixXd(w * v * v.transpose() * w));
      const double full = mixed_discriminant({{&chi, n - 1}, {&f, 1}});
      const double mixed = mixed_discriminant({{&chi, m - 1}, {&omega, n - m}, {&f, 1}});
      const double oracle = (c * full - m * mixed) / (factorial(n - 1) * det_omega);
      const double scale = std::max(1.0, std::abs(oracle));
      if (!(std::abs(kappa(i) - oracle) <= 1e-10 * scale)) {
        std::ostringstream os;
        os << "cone normalization check failed: kappa " << kappa(i) << " vs oracle "
           << oracle << " (n=" << n << ", m=" << m << ")";
        throw ScenarioError(os.str());
      }
    }
  }
}

ScenarioSpec named_scenario(const std::string& name) {
  ScenarioSpec s;
  s.name = name;
  if (name == "trivial") {
    s.require_big = false;
    s.target = ConeClass::kStrict;
  } else if (name == "strict") {
    s.chi_modes = {{0, 0.5, 0.0}, {1, 0.3, 0.25}};
    s.tilde_base = {0.2, 0.2};
    s.tilde_modes = {{1, 0.2, 0.1}};
    s.scale = 2.0;
    s.phi0_modes = {{{1, 0}, 0.06, 0.0}, {{1, 1}, 0.03, 0.7}, {{0, 2}, 0.01, 1.3}};
    s.random_modes = 2;
    s.random_amplitude = 0.01;
    s.seed = 11;
    s.target = ConeClass::kStrict;
  } else if (name == "strict3" || name == "strict3m2") {
    s.n = 3;
    s.m = name == "strict3" ? 1 : 2;
    s.points = 32;
    s.chi_modes = {{0, 0.4, 0.0}, {1, 0.3, 0.3}, {2, 0.2, 0.6}};
    s.tilde_base = {0.2, 0.2, 0.2};
    s.tilde_modes = {{2, 0.2, 0.1}};
    s.scale = 1.5;
    s.phi0_modes = {{{1, 0, 0}, 0.03, 0.0}, {{0, 1, 1}, 0.02, 0.4}};
    s.random_modes = 2;
    s.random_amplitude = 0.005;
    s.seed = 13;
    s.target = ConeClass::kStrict;
  } else if (name == "boundary" || name == "boundary-compound" || name == "boundary-disjoint") {
    // At the boundary kappa vanishes on the lines x_j = shift; chi_tilde
    // degenerates on x_1 = 0. Compound: shift 0. Disjoint: shift 1/2.
    const double shift = name == "boundary-disjoint" ? 0.5 : 0.0;
    s.chi_modes = {{0, 0.5, shift}, {1, 0.5, shift}};
    s.tilde_base = {0.0, 1.0};
    s.tilde_modes = {{0, 1.0, 0.0}};
    s.scale = 5.0;
    s.phi0_modes = {{{1, 0}, 0.2, 0.3}, {{0, 1}, 0.15, 1.1}, {{1, 1}, 0.1, 0.0}};
    s.seed = 17;
    s.target = ConeClass::kBoundary;
  } else if (name == "degenerate") {
    s.chi_modes = {{1, 0.3, 0.2}};
    s.tilde_base = {0.0, 1.0};
    s.tilde_modes = {{0, 1.0, 0.0}};
    s.scale = 2.0;
    s.phi0_modes = {{{1, 1}, 0.03, 0.5}};
    s.seed = 19;
  } else {
    throw ScenarioError("unknown scenario '" + name + "'");
  }
  return s;
}

std::vector<std::string> scenario_names() {
  return {"trivial",  "strict",           "strict3",           "strict3m2",
          "boundary", "boundary-compound", "boundary-disjoint", "degenerate"};
}

SymFormField scenario_chi(const ScenarioSpec& spec) {
  return trig_form(spec, spec.chi_base, 1.0, spec.chi_modes);
}

SymFormField scenario_chi_tilde(const ScenarioSpec& spec) {
  return trig_form(spec, spec.tilde_base, 0.0, spec.tilde_modes);
}

ScalarField scenario_phi0(const ScenarioSpec& spec) {
  std::vector<PotentialMode> modes = spec.phi0_modes;
  Rng rng(spec.seed);
  std::uniform_int_distribution<int> freq(-2, 2);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int r = 0; r < spec.random_modes; ++r) {
    PotentialMode mode;
    do {
      mode.k.assign(static_cast<std::size_t>(spec.n), 0);
      for (int& k : mode.k) k = freq(rng);
    } while (std::all_of(mode.k.begin(), mode.k.end(), [](int k) { return k == 0; }));
    mode.amplitude = spec.random_amplitude * unit(rng);
    mode.phase = std::numbers::pi * unit(rng);
    modes.push_back(mode);
  }
  for (const PotentialMode& mode : modes)
    if (static_cast<int>(mode.k.size()) != spec.n)
      throw ScenarioError("scenario: potential mode has the wrong dimension");
  const PeriodicGrid grid(spec.n, spec.points);
  return ScalarField::from_function(grid, [&](const Eigen::VectorXd& x) {
    double v = 0.0;
    for (const PotentialMode& mode : modes) {
      double arg = mode.phase;
      for (int j = 0; j < spec.n; ++j)
        arg += 2.0 * std::numbers::pi * mode.k[static_cast<std::size_t>(j)] * x(j);
      v += mode.amplitude * std::cos(arg);
    }
    return v;
  });
}

GeometrySetup build_scenario(const ScenarioSpec& spec) {
  check_normalization_once();
  GeometrySetup setup = GeometrySetup::create(scenario_chi(spec), scenario_chi_tilde(spec),
                                              scenario_omega(spec), spec.m, spec.scheme,
                                              checks_of(spec));
  if (spec.target) {
    const ConeReport rep = cone_condition(setup.chi(), setup.omega(), setup.m(), setup.c());
    if (rep.classification != *spec.target) {
      std::ostringstream os;
      os << "scenario '" << spec.name << "' is " << to_string(rep.classification)
         << " (min kappa " << rep.global_min << "), expected " << to_string(*spec.target);
      throw ScenarioError(os.str());
    }
  }
  return setup;
}

CalibratedScenario calibrate_boundary_scenario(const ScenarioSpec& spec) {
  check_normalization_once();
  auto evaluate = [&](double factor) {
    ScenarioSpec s = scaled_family(spec, factor);
    s.target.reset();
    GeometrySetup setup = build_scenario(s);
    ConeReport rep = cone_condition(setup.chi(), setup.omega(), setup.m(), setup.c());
    return CalibratedScenario{s, factor, std::move(setup), std::move(rep)};
  };

  CalibratedScenario at_one = evaluate(1.0);
  if (at_one.report.classification == ConeClass::kBoundary) {
    at_one.spec.target = ConeClass::kBoundary;
    return at_one;
  }
  const bool positive = at_one.report.global_min > 0.0;
  // Bracket search: factors 2, 1/2, 4, 1/4, ... and 0 for the perturbation family.
  double other = 0.0;
  bool found = false;
  for (int it = 0; it < 64 && !found; ++it) {
    double f;
    if (spec.family == ScenarioFamily::kPerturbation && it == 1)
      f = 0.0;
    else
      f = (it % 2 == 0) ? std::ldexp(1.0, it / 2 + 1) : std::ldexp(1.0, -(it / 2 + 1));
    try {
      const CalibratedScenario trial = evaluate(f);
      if ((trial.report.global_min > 0.0) != positive) {
        other = f;
        found = true;
      }
    } catch (const GeometryError&) {
      // inadmissible family member (chi not positive): not a bracket end
    }
  }
  if (!found)
    throw CalibrationError("calibrate_boundary_scenario: no bracket for '" + spec.name +
                           "' in 64 iterations");

  double lo = std::min(1.0, other), hi = std::max(1.0, other);
  const bool lo_positive = (lo == 1.0) == positive;
  std::optional<CalibratedScenario> best;
  for (int it = 0; it < 200 && hi - lo > 1e-10 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    CalibratedScenario trial = evaluate(mid);
    if (trial.report.classification == ConeClass::kBoundary) {
      best = std::move(trial);
      break;
    }
    if ((trial.report.global_min > 0.0) == lo_positive)
      lo = mid;
    else
      hi = mid;
  }
  if (!best) {
    CalibratedScenario a = evaluate(lo), b = evaluate(hi);
    best = std::abs(a.report.global_min) <= std::abs(b.report.global_min) ? std::move(a)
                                                                           : std::move(b);
  }
  if (best->report.classification != ConeClass::kBoundary) {
    std::ostringstream os;
    os << "calibrate_boundary_scenario: bisection ended at min kappa "
       << best->report.global_min;
    throw CalibrationError(os.str());
  }
  best->spec.target = ConeClass::kBoundary;
  return std::move(*best);
}

GeometrySetup degenerate_chi_tilde_scenario(const ScenarioSpec& spec) {
  const SymFormField chi_tilde = scenario_chi_tilde(spec);
  const ReferenceFrame frame(scenario_omega(spec));
  const Eigen::VectorXd lo = relative_min_eigenvalue(chi_tilde, frame);
  Index arg = 0;
  if (const double v = lo.minCoeff(&arg); v < -1e-12) {
    std::ostringstream os;
    os << "degenerate scenario: chi_tilde fails semipositivity (" << v << " at point " << arg
       << ")";
    throw ScenarioError(os.str());
  }
  const double big = wedge_integral({{&chi_tilde, spec.n}}, scenario_omega(spec));
  if (!(big > 0.0)) throw ScenarioError("degenerate scenario: chi_tilde is not big");
  ScenarioSpec s = spec;
  s.require_big = true;
  return build_scenario(s);
}

}  // namespace jflow
