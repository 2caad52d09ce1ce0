#include "jflow/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace jflow {

namespace {

using nlohmann::json;

void append_le(std::string& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

double read_le(const char* p) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b)
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[b])) << (8 * b);
  return std::bit_cast<double>(bits);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string(), 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spill(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string(), 0);
  out << data;
  if (!out) throw FormatError("write failed for " + path.string(), 0);
}

std::size_t array_length(const SnapshotHeader& h, std::size_t index) {
  std::size_t points = 1;
  for (int j = 0; j < h.n; ++j) points *= static_cast<std::size_t>(h.points);
  return h.layouts[index] == "form" ? points * static_cast<std::size_t>(2 * h.n * h.n) : points;
}

json row_json(const LedgerRow& r) {
  json j;
  j["t"] = r.t;
  j["dt"] = r.dt;
  j["sup_dphidt"] = r.sup_dphidt;
  j["inf_dphidt"] = r.inf_dphidt;
  j["mask_sup_abs_dphidt"] = r.mask_sup_abs_dphidt;
  j["ratio_min"] = r.ratio_min;
  j["ratio_max"] = r.ratio_max;
  j["phi_min"] = r.phi_min;
  j["phi_max"] = r.phi_max;
  j["w_max"] = r.w_max;
  j["min_eigenvalue"] = r.min_eigenvalue;
  j["J"] = r.j;
  j["combined"] = r.combined;
  j["dissipation"] = r.dissipation;
  j["theorem_norm"] = r.theorem_norm;
  j["violations"] = r.violations;
  j["converged"] = r.converged;
  return j;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

ScalarField Snapshot::scalar(std::size_t index) const {
  if (index >= arrays.size() || header.layouts[index] != "scalar")
    throw ArgumentError("snapshot: no scalar array at that index");
  const PeriodicGrid grid(header.n, header.points);
  return ScalarField(grid, Eigen::Map<const Eigen::VectorXd>(
                               arrays[index].data(), static_cast<Index>(arrays[index].size())));
}

SymFormField Snapshot::form(std::size_t index) const {
  if (index >= arrays.size() || header.layouts[index] != "form")
    throw ArgumentError("snapshot: no form array at that index");
  const PeriodicGrid grid(header.n, header.points);
  const int n = header.n;
  SymFormField f(grid);
  const std::vector<double>& a = arrays[index];
  for (Index p = 0; p < grid.total_points(); ++p)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const std::size_t at = static_cast<std::size_t>(2 * ((p * n + i) * n + j));
        if (a[at + 1] != 0.0)
          throw FormatError("snapshot: complex form entries are not supported here", at * 8);
        f.at(p)(i, j) = a[at];
      }
  return f;
}

void write_snapshot(const std::filesystem::path& path, const SnapshotHeader& header,
                    const std::vector<const ScalarField*>& scalars,
                    const std::vector<const SymFormField*>& forms) {
  SnapshotHeader h = header;
  h.arrays.resize(scalars.size() + forms.size());
  h.layouts.assign(scalars.size(), "scalar");
  h.layouts.insert(h.layouts.end(), forms.size(), "form");
  json j;
  j["schema"] = kSnapshotSchema;
  j["n"] = h.n;
  j["m"] = h.m;
  j["N"] = h.points;
  j["t"] = h.t;
  j["c"] = h.c;
  j["kind"] = h.kind;
  j["arrays"] = h.arrays;
  j["layouts"] = h.layouts;
  std::string out = j.dump();
  out.push_back('\n');
  for (const ScalarField* s : scalars) {
    if (s->grid().n() != h.n || s->grid().points_per_axis() != h.points)
      throw ArgumentError("write_snapshot: scalar field does not match header grid");
    for (Index p = 0; p < s->data().size(); ++p) append_le(out, (*s)[p]);
  }
  for (const SymFormField* f : forms) {
    if (f->dim() != h.n || f->grid().points_per_axis() != h.points)
      throw ArgumentError("write_snapshot: form field does not match header grid");
    for (Index p = 0; p < f->size(); ++p)
      for (int r = 0; r < h.n; ++r)
        for (int c = 0; c < h.n; ++c) {
          append_le(out, f->at(p)(r, c));
          append_le(out, 0.0);
        }
  }
  spill(path, out);
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  const std::string data = slurp(path);
  const std::size_t eol = data.find('\n');
  if (eol == std::string::npos) throw FormatError("snapshot: missing header line", data.size());
  Snapshot s;
  try {
    const json j = json::parse(data.substr(0, eol));
    if (j.at("schema").get<std::string>() != kSnapshotSchema)
      throw FormatError("snapshot: unknown schema", 0);
    s.header.n = j.at("n").get<int>();
    s.header.m = j.at("m").get<int>();
    s.header.points = j.at("N").get<int>();
    s.header.t = j.at("t").get<double>();
    s.header.c = j.at("c").get<double>();
    s.header.kind = j.at("kind").get<std::string>();
    s.header.arrays = j.at("arrays").get<std::vector<std::string>>();
    s.header.layouts = j.at("layouts").get<std::vector<std::string>>();
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("snapshot: bad header: ") + e.what(), e.byte);
  } catch (const json::exception& e) {
    throw FormatError(std::string("snapshot: bad header: ") + e.what(), 0);
  }
  if (s.header.n < 1 || s.header.points < 4 || s.header.arrays.size() != s.header.layouts.size())
    throw FormatError("snapshot: inconsistent header", 0);
  std::size_t offset = eol + 1;
  for (std::size_t a = 0; a < s.header.layouts.size(); ++a) {
    if (s.header.layouts[a] != "scalar" && s.header.layouts[a] != "form")
      throw FormatError("snapshot: unknown layout '" + s.header.layouts[a] + "'", 0);
    const std::size_t len = array_length(s.header, a);
    if (data.size() < offset + 8 * len)
      throw FormatError("snapshot: truncated array '" + s.header.arrays[a] + "'", data.size());
    std::vector<double> values(len);
    for (std::size_t k = 0; k < len; ++k) values[k] = read_le(data.data() + offset + 8 * k);
    offset += 8 * len;
    s.arrays.push_back(std::move(values));
  }
  if (offset != data.size()) throw FormatError("snapshot: trailing bytes", offset);
  return s;
}

std::vector<LedgerRow> ledger_rows(const RunResult& result) {
  const auto& records = result.trajectory.records;
  const auto& functionals = result.ledger.rows();
  std::vector<LedgerRow> rows;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const TrajectoryRecord& rec = records[r];
    const FunctionalRow& f = functionals[r];
    LedgerRow row;
    row.t = rec.t;
    row.dt = rec.dt;
    row.sup_dphidt = rec.sup_dphidt;
    row.inf_dphidt = rec.inf_dphidt;
    row.mask_sup_abs_dphidt = rec.mask_sup_abs_dphidt;
    row.ratio_min = rec.ratio_min;
    row.ratio_max = rec.ratio_max;
    row.phi_min = rec.phi_min;
    row.phi_max = rec.phi_max;
    row.w_max = rec.w_max;
    row.min_eigenvalue = rec.min_eigenvalue;
    row.j = f.j;
    row.combined = f.combined;
    row.dissipation = f.dissipation;
    row.theorem_norm = f.theorem_norm;
    row.violations = result.violations[r];
    row.converged = result.converged && r + 1 == records.size();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string ledger_line(const LedgerRow& row) { return row_json(row).dump(); }

LedgerRow parse_ledger_line(const std::string& line) {
  const json j = json::parse(line);
  LedgerRow r;
  r.t = j.at("t").get<double>();
  r.dt = j.at("dt").get<double>();
  r.sup_dphidt = j.at("sup_dphidt").get<double>();
  r.inf_dphidt = j.at("inf_dphidt").get<double>();
  r.mask_sup_abs_dphidt = j.value("mask_sup_abs_dphidt", 0.0);
  r.ratio_min = j.at("ratio_min").get<double>();
  r.ratio_max = j.at("ratio_max").get<double>();
  r.phi_min = j.at("phi_min").get<double>();
  r.phi_max = j.at("phi_max").get<double>();
  r.w_max = j.at("w_max").get<double>();
  r.min_eigenvalue = j.value("min_eigenvalue", 0.0);
  r.j = j.at("J").get<std::vector<double>>();
  r.combined = j.at("combined").get<double>();
  r.dissipation = j.at("dissipation").get<double>();
  r.theorem_norm = j.value("theorem_norm", 0.0);
  r.violations = j.at("violations").get<std::vector<std::string>>();
  r.converged = j.value("converged", false);
  return r;
}

void write_ledger(const std::filesystem::path& path, const std::vector<LedgerRow>& rows) {
  std::string out;
  for (const LedgerRow& r : rows) {
    out += ledger_line(r);
    out.push_back('\n');
  }
  spill(path, out);
}

std::vector<LedgerRow> read_ledger(const std::filesystem::path& path) {
  const std::string data = slurp(path);
  std::vector<LedgerRow> rows;
  std::size_t start = 0;
  while (start < data.size()) {
    std::size_t end = data.find('\n', start);
    if (end == std::string::npos) end = data.size();
    const std::string line = data.substr(start, end - start);
    if (!line.empty()) {
      try {
        rows.push_back(parse_ledger_line(line));
      } catch (const json::parse_error& e) {
        std::ostringstream os;
        os << "ledger: malformed record at byte " << start + (e.byte > 0 ? e.byte - 1 : 0);
        throw FormatError(os.str(), start + (e.byte > 0 ? e.byte - 1 : 0));
      } catch (const json::exception& e) {
        std::ostringstream os;
        os << "ledger: record at byte " << start << " lacks a field (" << e.what() << ")";
        throw FormatError(os.str(), start);
      }
      if (rows.size() > 1 && !(rows.back().t > rows[rows.size() - 2].t))
        throw FormatError("ledger: times are not increasing", start);
    }
    start = end + 1;
  }
  return rows;
}

std::string monitor_json(const MonitorReport& report, bool converged, long steps) {
  json j;
  j["converged"] = converged;
  j["steps"] = steps;
  j["violation"] = report.any_violation();
  json checks = json::array();
  for (const MonitorCheck& c : report.checks) {
    json e;
    e["name"] = c.name;
    e["slack"] = c.slack;
    e["worst_margin"] = c.margins.empty() ? 0.0 : c.worst();
    e["violated"] = c.violated();
    e["enforced"] = c.enforced;
    checks.push_back(e);
  }
  j["checks"] = checks;
  json fits = json::array();
  for (const ExponentialFit& f : report.fits) {
    json e;
    e["name"] = f.name;
    e["log_C"] = f.log_c;
    e["A"] = f.a;
    e["stabilized"] = f.stabilized;
    e["C_relative_change"] = f.c_relative_change;
    e["A_relative_change"] = f.a_relative_change;
    fits.push_back(e);
  }
  j["fits"] = fits;
  return j.dump(2);
}

std::string ledger_csv(const std::vector<LedgerRow>& rows) {
  const std::size_t nj = rows.empty() ? 0 : rows.front().j.size();
  std::ostringstream os;
  os << "t,dt,sup_dphidt,inf_dphidt,mask_sup_abs_dphidt,ratio_min,ratio_max,phi_min,phi_max,"
        "w_max,min_eigenvalue";
  for (std::size_t i = 0; i < nj; ++i) os << ",J_" << i;
  os << ",combined,dissipation,theorem_norm,violations,converged\n";
  for (const LedgerRow& r : rows) {
    os << fmt(r.t) << ',' << fmt(r.dt) << ',' << fmt(r.sup_dphidt) << ',' << fmt(r.inf_dphidt)
       << ',' << fmt(r.mask_sup_abs_dphidt) << ',' << fmt(r.ratio_min) << ','
       << fmt(r.ratio_max) << ',' << fmt(r.phi_min) << ',' << fmt(r.phi_max) << ','
       << fmt(r.w_max) << ',' << fmt(r.min_eigenvalue);
    for (std::size_t i = 0; i < nj; ++i) os << ',' << fmt(i < r.j.size() ? r.j[i] : 0.0);
    os << ',' << fmt(r.combined) << ',' << fmt(r.dissipation) << ',' << fmt(r.theorem_norm)
       << ',';
    for (std::size_t v = 0; v < r.violations.size(); ++v)
      os << (v ? ";" : "") << r.violations[v];
    os << ',' << (r.converged ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string ledger_plot_data(const std::vector<LedgerRow>& rows) {
  std::ostringstream os;
  os << "# t combined Jn_drift mask_sup_abs_dphidt w_max\n";
  const double jn0 = rows.empty() || rows.front().j.empty() ? 0.0 : rows.front().j.back();
  for (const LedgerRow& r : rows) {
    const double jn = r.j.empty() ? 0.0 : r.j.back();
    os << fmt(r.t) << ' ' << fmt(r.combined) << ' ' << fmt(jn - jn0) << ' '
       << fmt(r.mask_sup_abs_dphidt) << ' ' << fmt(r.w_max) << '\n';
  }
  return os.str();
}

}  // namespace jflow
