#pragma once

#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "jflow/grid.hpp"
#include "jflow/spectral.hpp"

namespace jflow {

/// Cholesky data of the reference form omega, shared by all pointwise kernels.
/// A constant omega stores one factor; a position-dependent omega stores one
/// per point (experimental).
class ReferenceFrame {
 public:
  explicit ReferenceFrame(const SymFormField& omega);

  int dim() const { return n_; }
  bool is_constant() const { return constant_; }
  bool is_identity() const { return identity_; }
  /// L^{-1} where omega(p) = L L^T.
  Eigen::Map<const Eigen::MatrixXd> inverse_factor(Index p) const;
  double det(Index p) const { return det_(constant_ ? 0 : p); }
  double min_eigenvalue() const { return min_eig_; }

 private:
  int n_;
  bool constant_;
  bool identity_;
  Eigen::MatrixXd linv_;  // n*n x (1 or P)
  Eigen::VectorXd det_;
  double min_eig_;
};

/// e_k(lambda) of a symmetric matrix (sum of k x k principal minors), k = 0..n.
Eigen::VectorXd principal_elem_sym(const Eigen::MatrixXd& a);

/// Per-point e_0..e_n of the eigenvalues of x relative to omega, (n+1) x P.
/// Computed from principal minors of L^{-1} x L^{-T}; no eigensolver.
Eigen::MatrixXd relative_elem_sym(const SymFormField& x, const ReferenceFrame& frame);

/// Per-point smallest eigenvalue of x relative to omega.
Eigen::VectorXd relative_min_eigenvalue(const SymFormField& x,
                                        const ReferenceFrame& frame);

/// Per-point simultaneous diagonalization of (x, omega): ascending eigenvalues
/// (n x P) and omega-orthonormal eigenvectors (column-major n*n x P), so that
/// V^T omega V = I and V^T x V = diag(values).
struct EigenFrameField {
  Eigen::MatrixXd values;
  Eigen::MatrixXd vectors;
};
EigenFrameField relative_eigenframe(const SymFormField& x,
                                    const ReferenceFrame& frame);

/// Normalized pointwise wedge coefficients W(a, b) of x^a ^ y^b ^ omega^(n-a-b)
/// for all a + b <= n (W = MD / n!, so omega = I gives W(0,0) = 1).
///
/// Obtained from e_k(lambda(x + tau y)) at the (n+1)-th roots of unity tau,
/// whose discrete Fourier inversion gives the coefficient of every tau^b.
class MixedWedgeTable {
 public:
  MixedWedgeTable(const SymFormField& x, const SymFormField& y,
                  const ReferenceFrame& frame);

  int dim() const { return n_; }
  const Eigen::VectorXd& coefficient(int a, int b) const;

 private:
  int n_;
  std::vector<Eigen::VectorXd> table_;  // indexed by a * (n+1) + b
};

/// (1/4) times the real Hessian of phi: the complex Hessian i ddbar(phi) for
/// potentials that depend only on the real torus coordinates. The result is
/// tagged Kahler-from-potential with zero base.
SymFormField complex_hessian(const ScalarField& phi,
                             DiffScheme scheme = DiffScheme::kSpectral);

/// base + complex_hessian(potential), tagged with its provenance.
SymFormField kahler_from_potential(const Eigen::MatrixXd& base,
                                   const ScalarField& potential,
                                   DiffScheme scheme = DiffScheme::kSpectral);

/// Quadrature of a pointwise density: sum * cell volume, pairwise summed.
double integrate(const PeriodicGrid& grid, const Eigen::VectorXd& density);

/// Integral of the wedge product of the listed (field, exponent) pairs with
/// omega filling the remaining degree. Exponents must sum to n (omega's own
/// exponent counts when it is listed explicitly). Up to two distinct non-omega
/// fields use the eigenvalue route; more fall back to mixed discriminants.
using WedgeFactor = std::pair<const SymFormField*, int>;
double wedge_integral(const std::vector<WedgeFactor>& factors,
                      const SymFormField& omega);

/// Grid points where the smallest eigenvalue of chi_tilde relative to omega
/// is at least delta: a numerical stand-in for the ample locus.
struct AmpMask {
  PeriodicGrid grid;
  std::vector<bool> mask;
  double delta;

  Index count() const;
  bool empty() const { return count() == 0; }
};
AmpMask amp_locus(const SymFormField& chi_tilde, const SymFormField& omega,
                  double delta);

}  // namespace jflow
