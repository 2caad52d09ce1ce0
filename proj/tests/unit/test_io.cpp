#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "common.hpp"
#include "doctest.h"
#include "jflow/cone.hpp"
#include "jflow/io.hpp"

using namespace jflow;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("jflow-io-" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void dump(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

std::vector<LedgerRow> sample_rows() {
  std::vector<LedgerRow> rows;
  for (int k = 0; k < 3; ++k) {
    LedgerRow r;
    r.t = 0.5 * k;
    r.dt = 0.01;
    r.sup_dphidt = 0.1 / (k + 1);
    r.inf_dphidt = -0.2 / (k + 1);
    r.mask_sup_abs_dphidt = 0.2 / (k + 1);
    r.ratio_min = 0.9;
    r.ratio_max = 1.1;
    r.phi_min = -0.3;
    r.phi_max = 0.25;
    r.w_max = 1.0 / 3.0;
    r.min_eigenvalue = 0.7;
    r.j = {1.0, -0.125, 0.0625};
    r.combined = -1e-3 * k;
    r.dissipation = 2e-3;
    r.theorem_norm = 0.1875;
    if (k == 1) r.violations = {"sign_sup", "c0_upper"};
    r.converged = k == 2;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("snapshot round trip") {
    ScenarioSpec spec = named_scenario("strict");
    spec.points = 8;
    const GeometrySetup setup = build_scenario(spec);
    const ScalarField phi = scenario_phi0(spec);
    const fs::path dir = temp_dir("snap");

    SnapshotHeader h;
    h.n = 2;
    h.m = 1;
    h.points = 8;
    h.t = 1.25;
    h.c = setup.c();
    h.kind = "state";
    h.arrays = {"phi", "chi"};
    write_snapshot(dir / "a.snap", h, {&phi}, {&setup.chi()});

    const Snapshot s = read_snapshot(dir / "a.snap");
    CHECK(s.header.kind == "state");
    CHECK(s.header.t == 1.25);
    CHECK(s.header.c == setup.c());
    REQUIRE(s.arrays.size() == 2);
    CHECK(s.scalar(0).data() == phi.data());
    CHECK(s.form(1).entries() == setup.chi().entries());
  }

  TEST_CASE("damaged snapshots report an offset") {
    ScalarField phi(PeriodicGrid(2, 4));
    phi.data().setLinSpaced(1.0, 16.0);
    const fs::path dir = temp_dir("bad");
    SnapshotHeader h;
    h.n = 2;
    h.m = 1;
    h.points = 4;
    h.kind = "phi";
    h.arrays = {"phi"};
    write_snapshot(dir / "ok.snap", h, {&phi}, {});
    const std::string bytes = slurp(dir / "ok.snap");
    const std::size_t header_end = bytes.find('\n') + 1;
    CHECK(bytes.size() == header_end + 16 * 8);

    dump(dir / "short.snap", bytes.substr(0, bytes.size() - 3));
    try {
      read_snapshot(dir / "short.snap");
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(e.offset() == bytes.size() - 3);
    }
    dump(dir / "long.snap", bytes + "x");
    CHECK_THROWS_AS(read_snapshot(dir / "long.snap"), FormatError);
    dump(dir / "json.snap", "{\"schema\": 3\n");
    CHECK_THROWS_AS(read_snapshot(dir / "json.snap"), FormatError);
  }

  TEST_CASE("ledger round trip") {
    const std::vector<LedgerRow> rows = sample_rows();
    for (const LedgerRow& r : rows) CHECK(parse_ledger_line(ledger_line(r)) == r);
    const fs::path dir = temp_dir("ledger");
    write_ledger(dir / "ledger.jsonl", rows);
    CHECK(read_ledger(dir / "ledger.jsonl") == rows);
  }

  TEST_CASE("truncated ledger names the byte") {
    const fs::path dir = temp_dir("trunc");
    write_ledger(dir / "ledger.jsonl", sample_rows());
    std::string text = slurp(dir / "ledger.jsonl");
    text.resize(text.size() - 20);
    dump(dir / "ledger.jsonl", text);
    const std::size_t last = text.rfind('\n') + 1;
    try {
      read_ledger(dir / "ledger.jsonl");
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(e.offset() >= last);
      CHECK(e.offset() <= text.size());
      CHECK(std::string(e.what()).find("byte") != std::string::npos);
    }
  }

  TEST_CASE("ledger rejects time going backwards") {
    std::vector<LedgerRow> rows = sample_rows();
    std::swap(rows[0], rows[2]);
    const fs::path dir = temp_dir("order");
    write_ledger(dir / "ledger.jsonl", rows);
    CHECK_THROWS_AS(read_ledger(dir / "ledger.jsonl"), FormatError);
  }

  TEST_CASE("csv and plot data") {
    const std::vector<LedgerRow> rows = sample_rows();
    const std::string csv = ledger_csv(rows);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    CHECK(csv.find("J_2") != std::string::npos);
    CHECK(csv.find("sign_sup;c0_upper") != std::string::npos);
    const std::string plot = ledger_plot_data(rows);
    CHECK(plot.rfind("# t", 0) == 0);
    CHECK(std::count(plot.begin(), plot.end(), '\n') == 4);
  }
}
