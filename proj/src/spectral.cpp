#include "jflow/spectral.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace jflow {

namespace {

void build_spectral(int n_pts, Eigen::MatrixXd& d1, Eigen::MatrixXd& d2) {
  const double pi = std::numbers::pi;
  const double h = 2.0 * pi / n_pts;
  d1.setZero(n_pts, n_pts);
  d2.setZero(n_pts, n_pts);
  for (int j = 0; j < n_pts; ++j) {
    for (int k = 0; k < n_pts; ++k) {
      if (j == k) {
        d2(j, k) = -pi * pi / (3.0 * h * h) - 1.0 / 6.0;
        continue;
      }
      const int diff = j - k;
      const double sign = (diff % 2 == 0) ? 1.0 : -1.0;
      const double half = 0.5 * diff * h;
      d1(j, k) = 0.5 * sign / std::tan(half);
      d2(j, k) = -0.5 * sign / (std::sin(half) * std::sin(half));
    }
  }
  // Rescale from period 2*pi to period 1.
  d1 *= 2.0 * pi;
  d2 *= 4.0 * pi * pi;
}

void build_fd4(int n_pts, Eigen::MatrixXd& d1, Eigen::MatrixXd& d2) {
  const double h = 1.0 / n_pts;
  d1.setZero(n_pts, n_pts);
  d2.setZero(n_pts, n_pts);
  auto wrap = [n_pts](int i) { return ((i % n_pts) + n_pts) % n_pts; };
  const double c1[5] = {1.0, -8.0, 0.0, 8.0, -1.0};
  const double c2[5] = {-1.0, 16.0, -30.0, 16.0, -1.0};
  for (int j = 0; j < n_pts; ++j) {
    for (int o = -2; o <= 2; ++o) {
      d1(j, wrap(j + o)) += c1[o + 2] / (12.0 * h);
      d2(j, wrap(j + o)) += c2[o + 2] / (12.0 * h * h);
    }
  }
}

}  // namespace

Differentiator::Differentiator(int points_per_axis, DiffScheme scheme)
    : points_(points_per_axis), scheme_(scheme) {
  if (points_per_axis < 4 || points_per_axis % 2 != 0)
    throw ArgumentError("Differentiator: points per axis must be even and >= 4");
  if (scheme == DiffScheme::kSpectral)
    build_spectral(points_, d1_, d2_);
  else
    build_fd4(points_, d1_, d2_);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (d2_ + d2_.transpose()));
  d2_basis_ = es.eigenvectors();
  d2_spectrum_ = es.eigenvalues();
}

std::shared_ptr<const Differentiator> Differentiator::get(int points_per_axis,
                                                          DiffScheme scheme) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const Differentiator>> cache;
  std::lock_guard lock(mutex);
  auto key = std::make_pair(points_per_axis, static_cast<int>(scheme));
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto d = std::make_shared<const Differentiator>(points_per_axis, scheme);
  cache.emplace(key, d);
  return d;
}

void Differentiator::apply_axis(const PeriodicGrid& grid, const Eigen::MatrixXd& d,
                                int axis, const Eigen::VectorXd& in,
                                Eigen::VectorXd& out) const {
  const Index n_pts = points_;
  const Index stride = grid.stride(axis);
  const Index total = grid.total_points();
  const Index blocks = total / (n_pts * stride);
  out.resize(total);
  if (stride == 1) {
    Eigen::Map<const Eigen::MatrixXd> src(in.data(), n_pts, blocks);
    Eigen::Map<Eigen::MatrixXd> dst(out.data(), n_pts, blocks);
    dst.noalias() = d * src;
    return;
  }
  for (Index b = 0; b < blocks; ++b) {
    const Index offset = b * n_pts * stride;
    Eigen::Map<const Eigen::MatrixXd> src(in.data() + offset, stride, n_pts);
    Eigen::Map<Eigen::MatrixXd> dst(out.data() + offset, stride, n_pts);
    dst.noalias() = src * d.transpose();
  }
}

int Differentiator::component_index(int n, int j, int k) {
  if (j > k) std::swap(j, k);
  // Row j of the upper triangle starts after sum_{r<j} (n - r) entries.
  return j * n - j * (j - 1) / 2 + (k - j);
}

void Differentiator::hessian(const PeriodicGrid& grid, const Eigen::VectorXd& u,
                             std::vector<Eigen::VectorXd>& components) const {
  const int n = grid.n();
  components.resize(static_cast<std::size_t>(n * (n + 1) / 2));
  std::vector<Eigen::VectorXd> first(static_cast<std::size_t>(n));
  for (int j = 0; j + 1 < n; ++j) apply_axis(grid, d1_, j, u, first[j]);
  for (int j = 0; j < n; ++j) {
    for (int k = j; k < n; ++k) {
      Eigen::VectorXd& out = components[component_index(n, j, k)];
      if (j == k)
        apply_axis(grid, d2_, j, u, out);
      else
        apply_axis(grid, d1_, k, first[j], out);
    }
  }
}

Eigen::VectorXd Differentiator::inverse_laplacian(const PeriodicGrid& grid,
                                                  const Eigen::VectorXd& f) const {
  const int n = grid.n();
  const Eigen::MatrixXd qt = d2_basis_.transpose();
  Eigen::VectorXd coeff = f;
  Eigen::VectorXd tmp;
  for (int j = 0; j < n; ++j) {
    apply_axis(grid, qt, j, coeff, tmp);
    coeff.swap(tmp);
  }
  const double cutoff = 1e-9 * d2_spectrum_.cwiseAbs().maxCoeff();
  for (Index p = 0; p < grid.total_points(); ++p) {
    double lam = 0.0;
    for (int j = 0; j < n; ++j) lam += d2_spectrum_(grid.coordinate_index(p, j));
    coeff(p) = std::abs(lam) > cutoff ? coeff(p) / lam : 0.0;
  }
  for (int j = 0; j < n; ++j) {
    apply_axis(grid, d2_basis_, j, coeff, tmp);
    coeff.swap(tmp);
  }
  return coeff;
}

}  // namespace jflow
