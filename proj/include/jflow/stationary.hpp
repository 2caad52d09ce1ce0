#pragma once

#include <vector>

#include "jflow/setup.hpp"
#include "jflow/state.hpp"

namespace jflow {

/// Thrown when the damped Newton line search gives up. Carries the last iterate.
class NonconvergenceError : public std::runtime_error {
 public:
  NonconvergenceError(const std::string& what, ScalarField last, double residual)
      : std::runtime_error(what), last_(std::move(last)), residual_(residual) {}
  const ScalarField& last_iterate() const { return last_; }
  double residual() const { return residual_; }

 private:
  ScalarField last_;
  double residual_;
};

/// a_i = e_{n-m-1}(1/lambda minus i) / lambda_i^2 in the simultaneous
/// diagonalization frame of (X, omega).
struct LinearizationCoefficients {
  Eigen::MatrixXd a;  // n x P
  EigenFrameField frame;
};
LinearizationCoefficients linearization_coefficients(const FlowState& state,
                                                     const GeometrySetup& setup);

/// Derivative of flow_rhs at a state:
///   L d = (n / binom(n,m)) (1/4) sum_jk G_jk d_j d_k d,  G = sum_i a_i v_i v_i^T,
/// using the same discrete Hessian as flow_rhs.
class LinearizedOperator {
 public:
  LinearizedOperator(const FlowState& state, const GeometrySetup& setup);

  Eigen::VectorXd apply(const Eigen::VectorXd& d) const;
  /// Zero-mean solution of the constant-coefficient surrogate (mean G) L0 u = f.
  Eigen::VectorXd precondition(const Eigen::VectorXd& f) const;

  const LinearizationCoefficients& coefficients() const { return coeff_; }
  /// max a / min a over the grid.
  double conditioning() const { return conditioning_; }

 private:
  const GeometrySetup* setup_;
  LinearizationCoefficients coeff_;
  std::vector<Eigen::VectorXd> g_;  // weighted G_jk, upper triangle
  double mean_scale_ = 1.0;
  double conditioning_ = 1.0;
};

struct GmresResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Right-preconditioned restarted GMRES for A x = b.
template <typename ApplyA, typename ApplyM>
GmresResult gmres(const ApplyA& apply_a, const ApplyM& apply_m, const Eigen::VectorXd& b,
                  double rel_tol, int restart = 60, int max_iterations = 600);

struct NewtonOptions {
  double tol = 1e-10;
  int max_iterations = 50;
  int max_line_search = 20;
  double backtrack = 0.5;
  double decrease = 0.99;
};

struct EllipticSolution {
  ScalarField psi;  // max psi = 0
  double residual_norm = 0.0;
  int newton_iterations = 0;
  double linearization_conditioning = 0.0;
  std::vector<double> residual_history;
  std::vector<double> increment_means;
};

/// Damped Newton for c X^n = n X^m ^ omega^(n-m), i.e. flow_rhs(psi) = 0.
EllipticSolution solve_elliptic(const GeometrySetup& setup, const ScalarField& init,
                                const NewtonOptions& options = {});

struct FlowLimitComparison {
  double spread = 0.0;    // max - min of phi_end - psi on the mask
  double shift = 0.0;     // K with J_n(psi + K) = target
  double sup_difference = 0.0;  // max |phi_end - psi - K| on the mask
  double jn_target = 0.0;
  double jn_matched = 0.0;
};

/// Compares a flow limit with a stationary solution on the mask (whole grid
/// when the mask is empty), selecting the additive constant by J_n matching.
FlowLimitComparison compare_flow_limit(const ScalarField& phi_end, const EllipticSolution& sol,
                                       const GeometrySetup& setup, const AmpMask& mask,
                                       double jn_target);

}  // namespace jflow

#include "jflow/detail/gmres.hpp"
