#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "doctest.h"
#include "jflow/io.hpp"

using namespace jflow;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("jflow-cli-" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Runs the CLI with stdout and stderr captured into one file.
Outcome cli(const std::string& args, const fs::path& dir) {
  const fs::path log = dir / "cli.log";
  const std::string cmd = std::string("'") + JFLOW_CLI_PATH + "' " + args + " > '" +
                          log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.out = slurp(log);
  return o;
}

std::string config(const std::string& name) { return std::string(JFLOW_CONFIG_DIR) + "/" + name; }

void dump(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("trivial run") {
    const fs::path dir = temp_dir("trivial");
    const Outcome o = cli("run --config '" + config("trivial.ini") + "' --out '" +
                              (dir / "run").string() + "'",
                          dir);
    CAPTURE(o.out);
    CHECK(o.code == 0);
    const auto rows = read_ledger(dir / "run" / "ledger.jsonl");
    CHECK(rows.size() == 1);
    CHECK(rows.front().converged);
    for (const char* f : {"config.ini", "setup.snap", "monitor.json", "phi_final.snap", "psi.snap"})
      CHECK(fs::exists(dir / "run" / f));

    const Outcome v = cli("verify '" + (dir / "run").string() + "'", dir);
    CAPTURE(v.out);
    CHECK(v.code == 0);
  }

  TEST_CASE("runs are deterministic") {
    const fs::path dir = temp_dir("det");
    dump(dir / "short.ini", "[run]\nscenario = strict\n[grid]\nN = 16\n[flow]\nt_max = 0.2\n"
                            "record_interval = 0.05\n[stationary]\nenabled = false\n");
    for (const char* out : {"a", "b"}) {
      const Outcome o = cli("run --config '" + (dir / "short.ini").string() + "' --out '" +
                                (dir / out).string() + "'",
                            dir);
      CAPTURE(o.out);
      REQUIRE(o.code == 0);
    }
    const std::string a = slurp(dir / "a" / "ledger.jsonl");
    CHECK(a.size() > 0);
    CHECK(a == slurp(dir / "b" / "ledger.jsonl"));
    CHECK(slurp(dir / "a" / "phi_final.snap") == slurp(dir / "b" / "phi_final.snap"));
  }

  TEST_CASE("bad configs exit 1") {
    const fs::path dir = temp_dir("bad");
    dump(dir / "neg.ini", "[flow]\ntol_converge = -1\n");
    const Outcome neg = cli("run --config '" + (dir / "neg.ini").string() + "'", dir);
    CHECK(neg.code == 1);
    CHECK(neg.out.find("flow.tol_converge") != std::string::npos);

    const Outcome missing = cli("run --config '" + (dir / "nope.ini").string() + "'", dir);
    CHECK(missing.code == 1);
    const Outcome usage = cli("run", dir);
    CHECK(usage.code == 1);
  }

  TEST_CASE("quick verify and fault injection") {
    const fs::path dir = temp_dir("verify");
    const Outcome ok = cli("verify '" + config("quick-verify.ini") + "'", dir);
    CAPTURE(ok.out);
    CHECK(ok.code == 0);
    CHECK(ok.out.find("[PASS]") != std::string::npos);

    const Outcome bad =
        cli("verify '" + config("quick-verify.ini") + "' --inject-fault elem_sym_partial_sign", dir);
    CAPTURE(bad.out);
    CHECK(bad.code == 2);
    CHECK(bad.out.find("[FAIL]") != std::string::npos);
    CHECK(bad.out.find("wedge-oracle") != std::string::npos);
  }

  TEST_CASE("report") {
    const fs::path dir = temp_dir("report");
    LedgerRow r;
    r.j = {1.0, 0.5, 0.25};
    std::vector<LedgerRow> rows{r, r};
    rows[1].t = 1.0;
    write_ledger(dir / "ledger.jsonl", rows);
    const Outcome ok = cli("report '" + (dir / "ledger.jsonl").string() + "'", dir);
    CAPTURE(ok.out);
    CHECK(ok.code == 0);
    CHECK(fs::exists(dir / "ledger.csv"));
    CHECK(fs::exists(dir / "ledger.plot.dat"));

    std::string text = slurp(dir / "ledger.jsonl");
    text.resize(text.size() - 10);
    dump(dir / "cut.jsonl", text);
    const Outcome cut = cli("report '" + (dir / "cut.jsonl").string() + "'", dir);
    CHECK(cut.code == 1);
    CHECK(cut.out.find("byte") != std::string::npos);
  }
}
