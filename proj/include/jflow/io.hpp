#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "jflow/flow.hpp"
#include "jflow/stationary.hpp"

namespace jflow {

inline constexpr const char* kSnapshotSchema = "jflow-field/1";

/// JSON header line of a snapshot, followed by `arrays` little-endian
/// float64 blocks in row-major grid order. Scalar arrays hold one value per
/// point; form arrays hold n*n (re, im) pairs per point.
struct SnapshotHeader {
  int n = 0;
  int m = 0;
  int points = 0;
  double t = 0.0;
  double c = 0.0;
  std::string kind;                  // "phi", "psi", "setup", ...
  std::vector<std::string> arrays;   // array names
  std::vector<std::string> layouts;  // "scalar" or "form"
};

struct Snapshot {
  SnapshotHeader header;
  std::vector<std::vector<double>> arrays;

  ScalarField scalar(std::size_t index) const;
  SymFormField form(std::size_t index) const;
};

void write_snapshot(const std::filesystem::path& path, const SnapshotHeader& header,
                    const std::vector<const ScalarField*>& scalars,
                    const std::vector<const SymFormField*>& forms);
/// Throws FormatError carrying the byte offset of the first bad byte.
Snapshot read_snapshot(const std::filesystem::path& path);

/// One JSON-lines ledger record.
struct LedgerRow {
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
  double min_eigenvalue = 0.0;
  std::vector<double> j;
  double combined = 0.0;
  double dissipation = 0.0;
  double theorem_norm = 0.0;
  std::vector<std::string> violations;
  bool converged = false;

  bool operator==(const LedgerRow&) const = default;
};

std::vector<LedgerRow> ledger_rows(const RunResult& result);
std::string ledger_line(const LedgerRow& row);
LedgerRow parse_ledger_line(const std::string& line);
void write_ledger(const std::filesystem::path& path, const std::vector<LedgerRow>& rows);
/// Throws FormatError with the byte offset of the offending line.
std::vector<LedgerRow> read_ledger(const std::filesystem::path& path);

/// Monitor checks and fits as one JSON document.
std::string monitor_json(const MonitorReport& report, bool converged, long steps);

/// CSV with the ledger keys as columns, and whitespace-separated plot data
/// (t, combined, J_n drift, mask sup |dphi/dt|, w_max).
std::string ledger_csv(const std::vector<LedgerRow>& rows);
std::string ledger_plot_data(const std::vector<LedgerRow>& rows);

}  // namespace jflow
