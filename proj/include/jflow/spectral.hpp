#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "jflow/grid.hpp"

namespace jflow {

enum class DiffScheme { kSpectral, kFiniteDifference4 };

/// Periodic differentiation on one axis of length N (period 1) by dense
/// circulant matrices, applied to n-dimensional fields axis by axis.
///
/// The spectral scheme uses trigonometric interpolation: first derivatives
/// annihilate the Nyquist mode, pure second derivatives keep it, so the
/// discrete Hessian has only constants in its kernel. The fourth-order
/// finite-difference scheme is a robustness fallback.
class Differentiator {
 public:
  Differentiator(int points_per_axis, DiffScheme scheme);

  /// Shared cached instance.
  static std::shared_ptr<const Differentiator> get(int points_per_axis,
                                                   DiffScheme scheme);

  int points_per_axis() const { return points_; }
  DiffScheme scheme() const { return scheme_; }
  const Eigen::MatrixXd& first() const { return d1_; }
  const Eigen::MatrixXd& second() const { return d2_; }

  /// out = D applied along `axis` of the flattened field `in`.
  void apply_axis(const PeriodicGrid& grid, const Eigen::MatrixXd& d, int axis,
                  const Eigen::VectorXd& in, Eigen::VectorXd& out) const;

  /// Real Hessian components d_j d_k u for j <= k, in the order
  /// (0,0),(0,1),..,(0,n-1),(1,1),...
  void hessian(const PeriodicGrid& grid, const Eigen::VectorXd& u,
               std::vector<Eigen::VectorXd>& components) const;

  /// Zero-mean solution of Laplacian(u) = f - mean(f).
  Eigen::VectorXd inverse_laplacian(const PeriodicGrid& grid,
                                    const Eigen::VectorXd& f) const;

  static int component_index(int n, int j, int k);

  /// Largest magnitude eigenvalue of the second-derivative matrix.
  double second_spectral_radius() const { return d2_spectrum_.cwiseAbs().maxCoeff(); }

 private:
  int points_;
  DiffScheme scheme_;
  Eigen::MatrixXd d1_;
  Eigen::MatrixXd d2_;
  Eigen::MatrixXd d2_basis_;     // orthonormal eigenvectors of d2_
  Eigen::VectorXd d2_spectrum_;  // matching eigenvalues
};

}  // namespace jflow
