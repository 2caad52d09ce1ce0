#pragma once

#include "jflow/setup.hpp"

namespace jflow {

/// A point on a flow trajectory with all derived quantities cached.
/// Invariant: x == chi + chi_tilde + i ddbar(phi) and every cache is in sync
/// with phi (FlowState values are only produced by make_state).
struct FlowState {
  ScalarField phi;
  double t = 0.0;
  SymFormField x;
  ScalarField dphi_dt;
  ScalarField w;              // trace of x relative to omega
  Eigen::MatrixXd elem_sym;   // e_0..e_n of x relative to omega, (n+1) x P
  double min_eigenvalue = 0.0;
  Index min_point = 0;
  /// Upper bound on the spectral radius of the linearized right-hand side.
  double stiffness = 0.0;
};

/// Builds the state for phi at time t. Throws GeometryError (carrying the
/// offending point) when chi + chi_tilde + i ddbar(phi) is not positive.
FlowState make_state(const GeometrySetup& setup, ScalarField phi, double t);

/// c - n (x^m ^ omega^(n-m)) / x^n = c - (n / binom(n,m)) e_{n-m}(1/lambda),
/// recomputed from the state's cached x.
ScalarField flow_rhs(const FlowState& state, const GeometrySetup& setup);

/// Pointwise x^n / (x^m ^ omega^(n-m)) = binom(n,m) e_n / e_m.
Eigen::VectorXd volume_ratio(const FlowState& state, const GeometrySetup& setup);

namespace detail {
/// Pointwise right-hand side from e_0..e_n; returns false at the first point
/// where some e_k <= 0 (x not positive), storing it in bad_point.
bool rhs_from_elem_sym(const Eigen::MatrixXd& elem_sym, int n, int m, double c,
                       Eigen::VectorXd& rhs, Index& bad_point);
}  // namespace detail

}  // namespace jflow
