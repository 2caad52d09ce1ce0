#pragma once

#include <vector>

#include "jflow/setup.hpp"
#include "jflow/state.hpp"

namespace jflow {

/// J_i(chi + chi_tilde, u) by the straight-line formula
///   (1/(i+1)) sum_{j=0..i} int u X_u^j ^ (chi + chi_tilde)^(i-j) ^ omega^(n-i).
/// Throws GeometryError when X_u is not positive.
double j_functional(int i, const ScalarField& u, const GeometrySetup& setup);

/// c J_n(u) - n J_m(u).
double combined_functional(const ScalarField& u, const GeometrySetup& setup);

/// int (dphi/dt)^2 X^n, from the state's caches.
double dissipation(const FlowState& state, const GeometrySetup& setup);

/// sum_{i=0..n} int u X_u^i ^ (chi + chi_tilde)^(n-i) = (n+1) J_n(u).
double theorem_normalization(const ScalarField& u, const GeometrySetup& setup);

/// All functionals of u from one pointwise wedge table.
struct FunctionalValues {
  std::vector<double> j;  // J_0..J_n
  double combined = 0.0;
  double theorem_norm = 0.0;
};
FunctionalValues evaluate_functionals(const ScalarField& u, const GeometrySetup& setup);

struct FunctionalRow {
  double t = 0.0;
  std::vector<double> j;
  double combined = 0.0;
  double dissipation = 0.0;
  double theorem_norm = 0.0;
};

/// Rows ordered by strictly increasing t.
class FunctionalLedger {
 public:
  void append(FunctionalRow row);
  const std::vector<FunctionalRow>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }
  std::size_t size() const { return rows_.size(); }

 private:
  std::vector<FunctionalRow> rows_;
};

}  // namespace jflow
