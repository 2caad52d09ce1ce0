#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace jflow {

struct PropertyResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Names of the suite properties in order; ids are 1-based positions.
const std::vector<std::string>& property_names();

struct VerifyOptions {
  std::vector<std::string> properties;  // empty: all
  std::ostream* log = nullptr;          // progress lines
};

/// Runs the selected properties. Scenario runs shared between properties are
/// computed once, deterministically from the scenario seeds. Throws
/// ArgumentError for unknown property names.
std::vector<PropertyResult> run_verify(const VerifyOptions& options);

/// One line per property: "[PASS] 3 name  detail (1.2 s)".
std::string format_results(const std::vector<PropertyResult>& results);

/// Checks that a run directory holds the expected artifacts and that each
/// parses. Returns the problems found (empty when complete).
std::vector<std::string> check_run_directory(const std::filesystem::path& dir);

}  // namespace jflow
