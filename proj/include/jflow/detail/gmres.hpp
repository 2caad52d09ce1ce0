#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace jflow {

template <typename ApplyA, typename ApplyM>
GmresResult gmres(const ApplyA& apply_a, const ApplyM& apply_m, const Eigen::VectorXd& b,
                  double rel_tol, int restart, int max_iterations) {
  const Eigen::Index size = b.size();
  GmresResult out;
  out.x = Eigen::VectorXd::Zero(size);
  const double b_norm = b.norm();
  if (b_norm == 0.0) {
    out.converged = true;
    return out;
  }
  Eigen::VectorXd r = b;
  double beta = b_norm;
  while (out.iterations < max_iterations) {
    Eigen::MatrixXd v(size, restart + 1);
    Eigen::MatrixXd z(size, restart);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(restart + 1, restart);
    Eigen::VectorXd cs(restart), sn(restart);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(restart + 1);
    g(0) = beta;
    v.col(0) = r / beta;
    int k = 0;
    for (; k < restart && out.iterations < max_iterations; ++k, ++out.iterations) {
      z.col(k) = apply_m(Eigen::VectorXd(v.col(k)));
      Eigen::VectorXd w = apply_a(Eigen::VectorXd(z.col(k)));
      // modified Gram-Schmidt, twice for stability
      for (int pass = 0; pass < 2; ++pass)
        for (int j = 0; j <= k; ++j) {
          const double d = v.col(j).dot(w);
          h(j, k) += d;
          w -= d * v.col(j);
        }
      h(k + 1, k) = w.norm();
      if (h(k + 1, k) > 0.0) v.col(k + 1) = w / h(k + 1, k);
      for (int j = 0; j < k; ++j) {
        const double t = cs(j) * h(j, k) + sn(j) * h(j + 1, k);
        h(j + 1, k) = -sn(j) * h(j, k) + cs(j) * h(j + 1, k);
        h(j, k) = t;
      }
      const double rho = std::hypot(h(k, k), h(k + 1, k));
      if (rho == 0.0) break;
      cs(k) = h(k, k) / rho;
      sn(k) = h(k + 1, k) / rho;
      h(k, k) = rho;
      h(k + 1, k) = 0.0;
      g(k + 1) = -sn(k) * g(k);
      g(k) = cs(k) * g(k);
      if (std::abs(g(k + 1)) <= rel_tol * b_norm || h(k, k) == 0.0) {
        ++k;
        ++out.iterations;
        break;
      }
    }
    const Eigen::VectorXd y =
        h.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    out.x += z.leftCols(k) * y;
    r = b - apply_a(out.x);
    beta = r.norm();
    out.relative_residual = beta / b_norm;
    if (out.relative_residual <= rel_tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace jflow
