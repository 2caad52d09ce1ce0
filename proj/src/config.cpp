#include "jflow/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace jflow {

namespace {

using LineMap = std::map<std::string, int>;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.push_back({});
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Field {
  std::string name;  // section.key
  int line;
  std::string value;

  [[noreturn]] void fail(const std::string& why) const {
    throw ConfigError(name + " (line " + std::to_string(line) + "): " + why, line, name);
  }

  double as_double(const std::string& s) const {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v))
      fail("expected a finite number, got '" + s + "'");
    return v;
  }
  double as_double() const { return as_double(value); }

  long long as_integer(const std::string& s) const {
    long long v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size())
      fail("expected an integer, got '" + s + "'");
    return v;
  }
  int as_int() const {
    const long long v = as_integer(value);
    if (v < -1000000000LL || v > 1000000000LL) fail("integer out of range");
    return static_cast<int>(v);
  }
  std::uint64_t as_u64() const {
    std::uint64_t v = 0;
    const auto r = std::from_chars(value.data(), value.data() + value.size(), v);
    if (value.empty() || r.ec != std::errc() || r.ptr != value.data() + value.size())
      fail("expected a non-negative integer, got '" + value + "'");
    return v;
  }
  bool as_bool() const {
    if (value == "true") return true;
    if (value == "false") return false;
    fail("expected true or false, got '" + value + "'");
  }
  std::string as_string() const {
    if (value.empty()) fail("empty value");
    return value;
  }
  std::vector<double> as_doubles() const {
    std::vector<double> out;
    for (const std::string& p : split(value, ',')) out.push_back(as_double(p));
    if (out.empty()) fail("empty list");
    return out;
  }
  std::vector<TrigMode> as_trig_modes() const {
    std::vector<TrigMode> out;
    if (value == "none") return out;
    for (const std::string& item : split(value, ';')) {
      const auto parts = split(item, ':');
      if (parts.size() != 3) fail("expected axis:amplitude:shift, got '" + item + "'");
      out.push_back({static_cast<int>(as_integer(parts[0])), as_double(parts[1]),
                     as_double(parts[2])});
    }
    return out;
  }
  std::vector<PotentialMode> as_potential_modes() const {
    std::vector<PotentialMode> out;
    if (value == "none") return out;
    for (const std::string& item : split(value, ';')) {
      const auto parts = split(item, ':');
      if (parts.size() != 3) fail("expected k1,k2,..:amplitude:phase, got '" + item + "'");
      PotentialMode mode;
      for (const std::string& k : split(parts[0], ','))
        mode.k.push_back(static_cast<int>(as_integer(k)));
      mode.amplitude = as_double(parts[1]);
      mode.phase = as_double(parts[2]);
      out.push_back(std::move(mode));
    }
    return out;
  }
};

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
  return s;
}

std::string join(const std::vector<TrigMode>& v) {
  if (v.empty()) return "none";
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i)
    s += (i ? "; " : "") + std::to_string(v[i].axis) + ":" + num(v[i].amplitude) + ":" +
         num(v[i].shift);
  return s;
}

std::string join(const std::vector<PotentialMode>& v) {
  if (v.empty()) return "none";
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += "; ";
    for (std::size_t j = 0; j < v[i].k.size(); ++j)
      s += (j ? "," : "") + std::to_string(v[i].k[j]);
    s += ":" + num(v[i].amplitude) + ":" + num(v[i].phase);
  }
  return s;
}

Integrator parse_method(const Field& f) {
  if (f.value == "rk4") return Integrator::kRk4;
  if (f.value == "euler") return Integrator::kExplicitEuler;
  f.fail("expected rk4 or euler, got '" + f.value + "'");
}

ScenarioFamily parse_family(const Field& f) {
  if (f.value == "perturbation") return ScenarioFamily::kPerturbation;
  if (f.value == "conformal") return ScenarioFamily::kConformal;
  f.fail("expected perturbation or conformal, got '" + f.value + "'");
}

DiffScheme parse_scheme(const Field& f) {
  if (f.value == "spectral") return DiffScheme::kSpectral;
  if (f.value == "fd4") return DiffScheme::kFiniteDifference4;
  f.fail("expected spectral or fd4, got '" + f.value + "'");
}

using Setter = std::function<void(RunConfig&, const Field&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"run.scenario", [](RunConfig& c, const Field& f) { c.scenario = f.as_string(); }},
      {"run.seed", [](RunConfig& c, const Field& f) { c.seed = f.as_u64(); }},
      {"grid.N", [](RunConfig& c, const Field& f) { c.points = f.as_int(); }},
      {"grid.n", [](RunConfig& c, const Field& f) { c.n = f.as_int(); }},
      {"grid.m", [](RunConfig& c, const Field& f) { c.m = f.as_int(); }},
      {"flow.method", [](RunConfig& c, const Field& f) { c.method = parse_method(f); }},
      {"flow.dt0", [](RunConfig& c, const Field& f) { c.dt0 = f.as_double(); }},
      {"flow.t_max", [](RunConfig& c, const Field& f) { c.t_max = f.as_double(); }},
      {"flow.tol_converge",
       [](RunConfig& c, const Field& f) { c.tol_converge = f.as_double(); }},
      {"flow.record_interval",
       [](RunConfig& c, const Field& f) { c.record_interval = f.as_double(); }},
      {"flow.cfl", [](RunConfig& c, const Field& f) { c.cfl = f.as_double(); }},
      {"flow.dt_growth", [](RunConfig& c, const Field& f) { c.dt_growth = f.as_double(); }},
      {"monitor.slack_max_principle",
       [](RunConfig& c, const Field& f) { c.slack_max_principle = f.as_double(); }},
      {"monitor.slack_sign", [](RunConfig& c, const Field& f) { c.slack_sign = f.as_double(); }},
      {"monitor.slack_c0", [](RunConfig& c, const Field& f) { c.slack_c0 = f.as_double(); }},
      {"monitor.mask_delta", [](RunConfig& c, const Field& f) { c.mask_delta = f.as_double(); }},
      {"stationary.enabled", [](RunConfig& c, const Field& f) { c.stationary = f.as_bool(); }},
      {"stationary.tol", [](RunConfig& c, const Field& f) { c.newton_tol = f.as_double(); }},
      {"stationary.max_iterations",
       [](RunConfig& c, const Field& f) { c.newton_max_iterations = f.as_int(); }},
      {"output.dir", [](RunConfig& c, const Field& f) { c.out_dir = f.as_string(); }},
      {"output.keep_fields", [](RunConfig& c, const Field& f) { c.keep_fields = f.as_bool(); }},
      {"verify.properties",
       [](RunConfig& c, const Field& f) {
         c.properties.clear();
         if (f.value == "all") return;
         for (const std::string& p : split(f.value, ',')) {
           if (p.empty()) f.fail("empty property name");
           c.properties.push_back(p);
         }
       }},
      {"scenario.chi_base",
       [](RunConfig& c, const Field& f) { c.overrides.chi_base = f.as_doubles(); }},
      {"scenario.chi_modes",
       [](RunConfig& c, const Field& f) { c.overrides.chi_modes = f.as_trig_modes(); }},
      {"scenario.tilde_base",
       [](RunConfig& c, const Field& f) { c.overrides.tilde_base = f.as_doubles(); }},
      {"scenario.tilde_modes",
       [](RunConfig& c, const Field& f) { c.overrides.tilde_modes = f.as_trig_modes(); }},
      {"scenario.omega_diag",
       [](RunConfig& c, const Field& f) { c.overrides.omega_diag = f.as_doubles(); }},
      {"scenario.scale", [](RunConfig& c, const Field& f) { c.overrides.scale = f.as_double(); }},
      {"scenario.phi0_modes",
       [](RunConfig& c, const Field& f) { c.overrides.phi0_modes = f.as_potential_modes(); }},
      {"scenario.random_modes",
       [](RunConfig& c, const Field& f) { c.overrides.random_modes = f.as_int(); }},
      {"scenario.random_amplitude",
       [](RunConfig& c, const Field& f) { c.overrides.random_amplitude = f.as_double(); }},
      {"scenario.family",
       [](RunConfig& c, const Field& f) { c.overrides.family = parse_family(f); }},
      {"scenario.target",
       [](RunConfig& c, const Field& f) {
         if (f.value != "none" && f.value != "strict" && f.value != "boundary" &&
             f.value != "violated")
           f.fail("expected strict, boundary, violated or none, got '" + f.value + "'");
         c.overrides.target = f.value;
       }},
      {"scenario.require_big",
       [](RunConfig& c, const Field& f) { c.overrides.require_big = f.as_bool(); }},
      {"scenario.scheme",
       [](RunConfig& c, const Field& f) { c.overrides.scheme = parse_scheme(f); }},
  };
  return table;
}

[[noreturn]] void reject(const LineMap& lines, const std::string& field, const std::string& why) {
  const auto it = lines.find(field);
  const int line = it == lines.end() ? 0 : it->second;
  std::string msg = field;
  if (line > 0) msg += " (line " + std::to_string(line) + ")";
  throw ConfigError(msg + ": " + why, line, field);
}

ScenarioSpec resolve(const RunConfig& c, const LineMap& lines) {
  ScenarioSpec spec;
  try {
    spec = named_scenario(c.scenario);
  } catch (const std::exception& e) {
    reject(lines, "run.scenario", e.what());
  }
  const ScenarioOverrides& o = c.overrides;
  if (c.seed) spec.seed = *c.seed;
  if (c.points) spec.points = *c.points;
  if (c.m) spec.m = *c.m;
  if (o.chi_base) spec.chi_base = *o.chi_base;
  if (o.chi_modes) spec.chi_modes = *o.chi_modes;
  if (o.tilde_base) spec.tilde_base = *o.tilde_base;
  if (o.tilde_modes) spec.tilde_modes = *o.tilde_modes;
  if (o.omega_diag) spec.omega_diag = *o.omega_diag;
  if (o.scale) spec.scale = *o.scale;
  if (o.phi0_modes) spec.phi0_modes = *o.phi0_modes;
  if (o.random_modes) spec.random_modes = *o.random_modes;
  if (o.random_amplitude) spec.random_amplitude = *o.random_amplitude;
  if (o.family) spec.family = *o.family;
  if (o.target) {
    if (*o.target == "none")
      spec.target.reset();
    else
      spec.target = cone_class_from_string(*o.target);
  }
  if (o.require_big) spec.require_big = *o.require_big;
  if (o.scheme) spec.scheme = *o.scheme;
  if (c.n && *c.n != spec.n) {
    if (!o.chi_base)
      reject(lines, "grid.n",
             "scenario '" + c.scenario + "' is defined for n = " + std::to_string(spec.n) +
                 "; give scenario.chi_base to change the dimension");
    spec.n = *c.n;
    spec.phi0_modes.clear();
    if (!o.tilde_base) spec.tilde_base.clear();
    if (!o.tilde_modes) spec.tilde_modes.clear();
    if (!o.omega_diag) spec.omega_diag.clear();
    if (!o.chi_modes) spec.chi_modes.clear();
  }

  const int n = spec.n;
  if (n < 2 || n > 4) reject(lines, "grid.n", "need 2 <= n <= 4");
  if (spec.m < 1 || spec.m >= n) reject(lines, "grid.m", "need 1 <= m < n");
  if (spec.points < 4 || spec.points % 2 != 0) reject(lines, "grid.N", "need N even and >= 4");
  auto check_len = [&](const std::vector<double>& v, const char* field) {
    if (!v.empty() && static_cast<int>(v.size()) != n)
      reject(lines, field, "expected " + std::to_string(n) + " entries");
  };
  check_len(spec.chi_base, "scenario.chi_base");
  check_len(spec.tilde_base, "scenario.tilde_base");
  check_len(spec.omega_diag, "scenario.omega_diag");
  for (const double d : spec.omega_diag)
    if (!(d > 0.0)) reject(lines, "scenario.omega_diag", "entries must be positive");
  auto check_axes = [&](const std::vector<TrigMode>& modes, const char* field) {
    for (const TrigMode& t : modes)
      if (t.axis < 0 || t.axis >= n) reject(lines, field, "mode axis out of range");
  };
  check_axes(spec.chi_modes, "scenario.chi_modes");
  check_axes(spec.tilde_modes, "scenario.tilde_modes");
  for (const PotentialMode& p : spec.phi0_modes)
    if (static_cast<int>(p.k.size()) != n)
      reject(lines, "scenario.phi0_modes", "wave vectors need " + std::to_string(n) + " entries");
  if (!(spec.scale > 0.0)) reject(lines, "scenario.scale", "must be positive");
  if (spec.random_modes < 0) reject(lines, "scenario.random_modes", "must be >= 0");
  return spec;
}

void validate(const RunConfig& c, const LineMap& lines) {
  auto positive = [&](double v, const char* field) {
    if (!(v > 0.0)) reject(lines, field, "must be > 0, got " + num(v));
  };
  if (c.dt0 < 0.0) reject(lines, "flow.dt0", "must be >= 0 (0 selects the default)");
  positive(c.t_max, "flow.t_max");
  positive(c.tol_converge, "flow.tol_converge");
  positive(c.record_interval, "flow.record_interval");
  positive(c.cfl, "flow.cfl");
  if (!(c.dt_growth >= 1.0)) reject(lines, "flow.dt_growth", "must be >= 1");
  positive(c.slack_max_principle, "monitor.slack_max_principle");
  positive(c.slack_sign, "monitor.slack_sign");
  positive(c.slack_c0, "monitor.slack_c0");
  positive(c.mask_delta, "monitor.mask_delta");
  positive(c.newton_tol, "stationary.tol");
  if (c.newton_max_iterations < 1) reject(lines, "stationary.max_iterations", "must be >= 1");
  resolve(c, lines);
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig config;
  LineMap lines;
  std::set<std::string> sections = {"run",        "grid",   "flow",   "monitor",
                                    "stationary", "output", "verify", "scenario"};
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(line_no) + ": unterminated section header",
                          line_no);
      section = trim(line.substr(1, line.size() - 2));
      if (!sections.count(section))
        throw ConfigError("line " + std::to_string(line_no) + ": unknown section [" + section +
                              "]",
                          line_no, section);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value", line_no);
    if (section.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": key outside of any section",
                        line_no);
    const Field field{section + "." + trim(line.substr(0, eq)), line_no,
                      trim(line.substr(eq + 1))};
    const auto it = setters().find(field.name);
    if (it == setters().end()) field.fail("unknown key");
    if (lines.count(field.name)) field.fail("duplicate key");
    lines[field.name] = line_no;
    it->second(config, field);
  }
  validate(config, lines);
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream os;
  os << "[run]\nscenario = " << c.scenario << "\n";
  if (c.seed) os << "seed = " << *c.seed << "\n";
  os << "\n[grid]\n";
  if (c.points) os << "N = " << *c.points << "\n";
  if (c.n) os << "n = " << *c.n << "\n";
  if (c.m) os << "m = " << *c.m << "\n";
  os << "\n[flow]\nmethod = " << to_string(c.method) << "\ndt0 = " << num(c.dt0)
     << "\nt_max = " << num(c.t_max) << "\ntol_converge = " << num(c.tol_converge)
     << "\nrecord_interval = " << num(c.record_interval) << "\ncfl = " << num(c.cfl)
     << "\ndt_growth = " << num(c.dt_growth) << "\n";
  os << "\n[monitor]\nslack_max_principle = " << num(c.slack_max_principle)
     << "\nslack_sign = " << num(c.slack_sign) << "\nslack_c0 = " << num(c.slack_c0)
     << "\nmask_delta = " << num(c.mask_delta) << "\n";
  os << "\n[stationary]\nenabled = " << (c.stationary ? "true" : "false")
     << "\ntol = " << num(c.newton_tol) << "\nmax_iterations = " << c.newton_max_iterations
     << "\n";
  os << "\n[output]\ndir = " << c.out_dir << "\nkeep_fields = "
     << (c.keep_fields ? "true" : "false") << "\n";
  os << "\n[verify]\nproperties = ";
  if (c.properties.empty()) os << "all";
  for (std::size_t i = 0; i < c.properties.size(); ++i)
    os << (i ? ", " : "") << c.properties[i];
  os << "\n";
  const ScenarioOverrides& o = c.overrides;
  os << "\n[scenario]\n";
  if (o.chi_base) os << "chi_base = " << join(*o.chi_base) << "\n";
  if (o.chi_modes) os << "chi_modes = " << join(*o.chi_modes) << "\n";
  if (o.tilde_base) os << "tilde_base = " << join(*o.tilde_base) << "\n";
  if (o.tilde_modes) os << "tilde_modes = " << join(*o.tilde_modes) << "\n";
  if (o.omega_diag) os << "omega_diag = " << join(*o.omega_diag) << "\n";
  if (o.scale) os << "scale = " << num(*o.scale) << "\n";
  if (o.phi0_modes) os << "phi0_modes = " << join(*o.phi0_modes) << "\n";
  if (o.random_modes) os << "random_modes = " << *o.random_modes << "\n";
  if (o.random_amplitude) os << "random_amplitude = " << num(*o.random_amplitude) << "\n";
  if (o.family) os << "family = " << to_string(*o.family) << "\n";
  if (o.target) os << "target = " << *o.target << "\n";
  if (o.require_big) os << "require_big = " << (*o.require_big ? "true" : "false") << "\n";
  if (o.scheme) os << "scheme = " << to_string(*o.scheme) << "\n";
  return os.str();
}

void validate_config(const RunConfig& config) { validate(config, {}); }

ScenarioSpec resolve_scenario(const RunConfig& config) { return resolve(config, {}); }

FlowConfig flow_config(const RunConfig& c) {
  FlowConfig f;
  f.method = c.method;
  f.dt0 = c.dt0;
  f.t_max = c.t_max;
  f.tol_converge = c.tol_converge;
  f.record_interval = c.record_interval;
  f.cfl = c.cfl;
  f.dt_growth = c.dt_growth;
  f.mask_delta = c.mask_delta;
  f.slack_max_principle = c.slack_max_principle;
  f.slack_sign = c.slack_sign;
  f.slack_c0 = c.slack_c0;
  f.keep_fields = c.keep_fields;
  return f;
}

NewtonOptions newton_options(const RunConfig& c) {
  NewtonOptions o;
  o.tol = c.newton_tol;
  o.max_iterations = c.newton_max_iterations;
  return o;
}

const char* to_string(Integrator method) {
  return method == Integrator::kRk4 ? "rk4" : "euler";
}

const char* to_string(ScenarioFamily family) {
  return family == ScenarioFamily::kPerturbation ? "perturbation" : "conformal";
}

const char* to_string(DiffScheme scheme) {
  return scheme == DiffScheme::kSpectral ? "spectral" : "fd4";
}

}  // namespace jflow
