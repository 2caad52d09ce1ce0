#include "jflow/geometry.hpp"

#include <cmath>
#include <numbers>

#include "jflow/parallel.hpp"

namespace jflow {

namespace {

template <typename Scalar>
Scalar minor_det(const Scalar* a, int lda, const int* idx, int s) {
  auto at = [&](int r, int c) { return a[idx[c] * lda + idx[r]]; };
  switch (s) {
    case 0:
      return Scalar(1);
    case 1:
      return at(0, 0);
    case 2:
      return at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0);
    case 3:
      return at(0, 0) * (at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1)) -
             at(0, 1) * (at(1, 0) * at(2, 2) - at(1, 2) * at(2, 0)) +
             at(0, 2) * (at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0));
    default: {
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(s, s);
      for (int r = 0; r < s; ++r)
        for (int c = 0; c < s; ++c) m(r, c) = at(r, c);
      return m.determinant();
    }
  }
}

/// e_0..e_n of the n x n column-major matrix a as sums of principal minors.
template <typename Scalar>
void principal_minor_sums(const Scalar* a, int n, Scalar* e) {
  if (n == 2) {
    e[0] = Scalar(1);
    e[1] = a[0] + a[3];
    e[2] = a[0] * a[3] - a[1] * a[2];
    return;
  }
  if (n == 3) {
    // column-major: a[c * 3 + r]
    const Scalar m01 = a[0] * a[4] - a[3] * a[1];
    const Scalar m02 = a[0] * a[8] - a[6] * a[2];
    const Scalar m12 = a[4] * a[8] - a[7] * a[5];
    e[0] = Scalar(1);
    e[1] = a[0] + a[4] + a[8];
    e[2] = m01 + m02 + m12;
    e[3] = a[0] * m12 - a[3] * (a[1] * a[8] - a[7] * a[2]) + a[6] * (a[1] * a[5] - a[4] * a[2]);
    return;
  }
  for (int k = 0; k <= n; ++k) e[k] = Scalar(0);
  int idx[16];
  const unsigned subsets = 1u << n;
  for (unsigned s = 0; s < subsets; ++s) {
    int size = 0;
    for (int j = 0; j < n; ++j)
      if (s & (1u << j)) idx[size++] = j;
    e[size] += minor_det(a, n, idx, size);
  }
}

/// out = Linv * x * Linv^T for column-major n x n buffers.
template <typename Scalar>
void congruence(const double* linv, const Scalar* x, int n, Scalar* out) {
  Scalar tmp[64];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Scalar s(0);
      for (int k = 0; k < n; ++k) s += linv[k * n + i] * x[j * n + k];
      tmp[j * n + i] = s;
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Scalar s(0);
      for (int k = 0; k < n; ++k) s += tmp[k * n + i] * linv[k * n + j];
      out[j * n + i] = s;
    }
}

template <int Dim>
void eigen_kernel(const SymFormField& x, const ReferenceFrame& frame, Index begin,
                  Index end, Eigen::MatrixXd* values, Eigen::VectorXd* min_values,
                  Eigen::MatrixXd* vectors) {
  using Mat = Eigen::Matrix<double, Dim, Dim>;
  const int n = x.dim();
  Mat a(n, n);
  Eigen::SelfAdjointEigenSolver<Mat> es(n);
  const int options =
      vectors != nullptr ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly;
  for (Index p = begin; p < end; ++p) {
    if (frame.is_identity())
      a = x.at(p);
    else
      congruence(frame.inverse_factor(p).data(), x.at(p).data(), n, a.data());
    if constexpr (Dim == 2) {
      if (vectors == nullptr) {
        const double half = 0.5 * (a(0, 0) + a(1, 1));
        const double r = std::hypot(0.5 * (a(0, 0) - a(1, 1)), a(0, 1));
        const double hi = half + r;
        const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(0, 1);
        const double lo = det > 0.0 ? det / hi : half - r;
        if (values != nullptr) values->col(p) << lo, hi;
        if (min_values != nullptr) (*min_values)(p) = lo;
        continue;
      }
      es.computeDirect(a, options);
    } else {
      es.compute(a, options);
    }
    if (values != nullptr) values->col(p) = es.eigenvalues();
    if (min_values != nullptr) (*min_values)(p) = es.eigenvalues()(0);
    if (vectors != nullptr) {
      Mat v = frame.inverse_factor(p).transpose() * es.eigenvectors();
      vectors->col(p) = Eigen::Map<const Eigen::VectorXd>(v.data(), n * n);
    }
  }
}

void eigen_dispatch(const SymFormField& x, const ReferenceFrame& frame,
                    Eigen::MatrixXd* values, Eigen::VectorXd* min_values,
                    Eigen::MatrixXd* vectors) {
  if (x.dim() != frame.dim())
    throw ArgumentError("relative spectrum: dimension mismatch with omega");
  parallel_for(x.size(), [&](Index b, Index e) {
    switch (x.dim()) {
      case 2:
        eigen_kernel<2>(x, frame, b, e, values, min_values, vectors);
        break;
      case 3:
        eigen_kernel<3>(x, frame, b, e, values, min_values, vectors);
        break;
      case 4:
        eigen_kernel<4>(x, frame, b, e, values, min_values, vectors);
        break;
      default:
        eigen_kernel<Eigen::Dynamic>(x, frame, b, e, values, min_values, vectors);
    }
  });
}

double multinomial(int n, int a, int b, int c) {
  return factorial(n) / (factorial(a) * factorial(b) * factorial(c));
}

}  // namespace

ReferenceFrame::ReferenceFrame(const SymFormField& omega)
    : n_(omega.dim()), constant_(omega.is_constant()) {
  const Index cols = constant_ ? 1 : omega.size();
  linv_.resize(n_ * n_, cols);
  det_.resize(cols);
  min_eig_ = std::numeric_limits<double>::infinity();
  for (Index p = 0; p < cols; ++p) {
    const Eigen::MatrixXd w = omega.at(p);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()(0);
    if (!(lo > 0.0))
      throw GeometryError("omega is not positive definite", lo, p);
    min_eig_ = std::min(min_eig_, lo);
    Eigen::LLT<Eigen::MatrixXd> llt(w);
    Eigen::MatrixXd linv = llt.matrixL().solve(Eigen::MatrixXd::Identity(n_, n_));
    linv_.col(p) = Eigen::Map<const Eigen::VectorXd>(linv.data(), n_ * n_);
    det_(p) = w.determinant();
  }
  identity_ = constant_ && (Eigen::Map<const Eigen::MatrixXd>(linv_.data(), n_, n_) -
                            Eigen::MatrixXd::Identity(n_, n_))
                                   .cwiseAbs()
                                   .maxCoeff() == 0.0;
}

Eigen::Map<const Eigen::MatrixXd> ReferenceFrame::inverse_factor(Index p) const {
  return Eigen::Map<const Eigen::MatrixXd>(linv_.col(constant_ ? 0 : p).data(), n_,
                                           n_);
}

Eigen::VectorXd principal_elem_sym(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  Eigen::VectorXd e(n + 1);
  principal_minor_sums(a.data(), n, e.data());
  return e;
}

Eigen::MatrixXd relative_elem_sym(const SymFormField& x, const ReferenceFrame& frame) {
  const int n = x.dim();
  if (n != frame.dim()) throw ArgumentError("relative_elem_sym: dimension mismatch");
  Eigen::MatrixXd e(n + 1, x.size());
  parallel_for(x.size(), [&](Index b, Index end) {
    double a[64];
    for (Index p = b; p < end; ++p) {
      const double* src = x.at(p).data();
      if (!frame.is_identity()) {
        congruence(frame.inverse_factor(p).data(), src, n, a);
        src = a;
      }
      principal_minor_sums(src, n, e.col(p).data());
    }
  });
  return e;
}

Eigen::VectorXd relative_min_eigenvalue(const SymFormField& x,
                                        const ReferenceFrame& frame) {
  Eigen::VectorXd out(x.size());
  eigen_dispatch(x, frame, nullptr, &out, nullptr);
  return out;
}

EigenFrameField relative_eigenframe(const SymFormField& x, const ReferenceFrame& frame) {
  EigenFrameField f;
  f.values.resize(x.dim(), x.size());
  f.vectors.resize(x.dim() * x.dim(), x.size());
  eigen_dispatch(x, frame, &f.values, nullptr, &f.vectors);
  return f;
}

MixedWedgeTable::MixedWedgeTable(const SymFormField& x, const SymFormField& y,
                                 const ReferenceFrame& frame)
    : n_(x.dim()) {
  if (y.dim() != n_ || frame.dim() != n_ || !(x.grid() == y.grid()))
    throw ArgumentError("MixedWedgeTable: field mismatch");
  const int nodes = n_ + 1;
  const Index size = x.size();
  table_.assign(static_cast<std::size_t>(nodes * nodes), Eigen::VectorXd());
  for (int a = 0; a <= n_; ++a)
    for (int b = 0; a + b <= n_; ++b) table_[a * nodes + b].resize(size);

  std::vector<Complex> tau(nodes);
  for (int j = 0; j < nodes; ++j)
    tau[j] = std::polar(1.0, 2.0 * std::numbers::pi * j / nodes);

  parallel_for(size, [&](Index begin, Index end) {
    double ax[64], ay[64];
    Complex m[64];
    std::vector<Complex> e(static_cast<std::size_t>(nodes * nodes));
    const int nn = n_ * n_;
    for (Index p = begin; p < end; ++p) {
      const double* px = x.at(p).data();
      const double* py = y.at(p).data();
      if (!frame.is_identity()) {
        congruence(frame.inverse_factor(p).data(), px, n_, ax);
        congruence(frame.inverse_factor(p).data(), py, n_, ay);
        px = ax;
        py = ay;
      }
      for (int j = 0; j < nodes; ++j) {
        for (int r = 0; r < nn; ++r) m[r] = px[r] + tau[j] * py[r];
        principal_minor_sums(m, n_, &e[static_cast<std::size_t>(j * nodes)]);
      }
      const double det_omega = frame.det(p);
      for (int k = 0; k <= n_; ++k) {
        for (int b = 0; b <= k; ++b) {
          Complex q = 0.0;
          for (int j = 0; j < nodes; ++j)
            q += e[static_cast<std::size_t>(j * nodes + k)] * std::conj(std::pow(tau[j], b));
          q /= static_cast<double>(nodes);
          const int a = k - b;
          table_[a * nodes + b](p) =
              det_omega * q.real() / multinomial(n_, a, b, n_ - k);
        }
      }
    }
  });
}

const Eigen::VectorXd& MixedWedgeTable::coefficient(int a, int b) const {
  if (a < 0 || b < 0 || a + b > n_)
    throw ArgumentError("MixedWedgeTable: exponents out of range");
  return table_[a * (n_ + 1) + b];
}

SymFormField complex_hessian(const ScalarField& phi, DiffScheme scheme) {
  if (!phi.all_finite()) throw ArgumentError("complex_hessian: non-finite potential");
  const PeriodicGrid& grid = phi.grid();
  const int n = grid.n();
  auto diff = Differentiator::get(grid.points_per_axis(), scheme);
  std::vector<Eigen::VectorXd> comps;
  diff->hessian(grid, phi.data(), comps);
  SymFormField h(grid);
  for (int j = 0; j < n; ++j)
    for (int k = j; k < n; ++k) {
      const Eigen::VectorXd& c = comps[Differentiator::component_index(n, j, k)];
      h.entries().row(k * n + j) = 0.25 * c.transpose();
      if (j != k) h.entries().row(j * n + k) = 0.25 * c.transpose();
    }
  h.set_provenance({Eigen::MatrixXd::Zero(n, n),
                    std::make_shared<const ScalarField>(phi)});
  return h;
}

SymFormField kahler_from_potential(const Eigen::MatrixXd& base,
                                   const ScalarField& potential, DiffScheme scheme) {
  SymFormField h = complex_hessian(potential, scheme);
  SymFormField out = SymFormField::constant(potential.grid(), base) + h;
  out.set_provenance({base, std::make_shared<const ScalarField>(potential)});
  return out;
}

double integrate(const PeriodicGrid& grid, const Eigen::VectorXd& density) {
  return pairwise_sum(density) * grid.cell_volume();
}

double wedge_integral(const std::vector<WedgeFactor>& factors,
                      const SymFormField& omega) {
  const int n = omega.dim();
  int total = 0;
  std::vector<WedgeFactor> others;
  for (const WedgeFactor& f : factors) {
    if (f.second < 0) throw ArgumentError("wedge_integral: negative exponent");
    total += f.second;
    if (f.second == 0) continue;
    if (f.first->dim() != n || !(f.first->grid() == omega.grid()))
      throw ArgumentError("wedge_integral: field mismatch");
    if (f.first == &omega) continue;
    bool merged = false;
    for (WedgeFactor& o : others)
      if (o.first == f.first) {
        o.second += f.second;
        merged = true;
      }
    if (!merged) others.push_back(f);
  }
  if (total != n) throw ArgumentError("wedge_integral: exponents must sum to n");
  const PeriodicGrid& grid = omega.grid();
  const ReferenceFrame frame(omega);
  Eigen::VectorXd density(grid.total_points());
  if (others.empty()) {
    for (Index p = 0; p < grid.total_points(); ++p) density(p) = frame.det(p);
  } else if (others.size() == 1) {
    const int k = others[0].second;
    const Eigen::MatrixXd e = relative_elem_sym(*others[0].first, frame);
    for (Index p = 0; p < grid.total_points(); ++p)
      density(p) = frame.det(p) * e(k, p) / binomial(n, k);
  } else if (others.size() == 2) {
    const MixedWedgeTable table(*others[0].first, *others[1].first, frame);
    density = table.coefficient(others[0].second, others[1].second);
  } else {
    for (Index p = 0; p < grid.total_points(); ++p) {
      std::vector<HermForm> forms;
      for (const WedgeFactor& f : others)
        for (int r = 0; r < f.second; ++r) forms.push_back(f.first->form(p));
      for (int r = static_cast<int>(forms.size()); r < n; ++r)
        forms.push_back(omega.form(p));
      density(p) = mixed_discriminant(forms) / factorial(n);
    }
  }
  return integrate(grid, density);
}

Index AmpMask::count() const {
  Index c = 0;
  for (bool b : mask) c += b ? 1 : 0;
  return c;
}

AmpMask amp_locus(const SymFormField& chi_tilde, const SymFormField& omega,
                  double delta) {
  if (!(delta > 0.0)) throw ArgumentError("amp_locus: delta must be positive");
  const ReferenceFrame frame(omega);
  const Eigen::VectorXd lo = relative_min_eigenvalue(chi_tilde, frame);
  AmpMask m{chi_tilde.grid(), std::vector<bool>(static_cast<std::size_t>(lo.size())),
            delta};
  for (Index p = 0; p < lo.size(); ++p) m.mask[static_cast<std::size_t>(p)] = lo(p) >= delta;
  return m;
}

}  // namespace jflow
