#include "jflow/herm.hpp"

#include <cmath>
#include <sstream>

namespace jflow {

namespace fault {
namespace {
Fault g_active = Fault::kNone;
}
void inject(Fault f) {
  g_active = f;
  detail::flip_elem_sym_partial = f == Fault::kElemSymPartialSign;
}
Fault active() { return g_active; }
}  // namespace fault

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return std::round(r);
}

double factorial(int n) {
  double r = 1.0;
  for (int j = 2; j <= n; ++j) r *= j;
  return r;
}

HermForm::HermForm(const ComplexMatrix& entries) {
  if (entries.rows() != entries.cols() || entries.rows() < 1)
    throw ArgumentError("HermForm: entries must be a nonempty square matrix");
  const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
  const double skew = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
  if (!(skew <= kSymmetrizeTol * scale)) {
    std::ostringstream os;
    os << "HermForm: matrix is not Hermitian (max |M - M*| = " << skew << ")";
    throw ArgumentError(os.str());
  }
  entries_ = 0.5 * (entries + entries.adjoint());
}

HermForm::HermForm(const Eigen::MatrixXd& real_entries)
    : HermForm(ComplexMatrix(real_entries.cast<Complex>())) {}

HermForm HermForm::identity(int n) {
  return HermForm(Eigen::MatrixXd(Eigen::MatrixXd::Identity(n, n)));
}

HermForm HermForm::diagonal(const Eigen::VectorXd& d) {
  return HermForm(Eigen::MatrixXd(d.asDiagonal()));
}

double HermForm::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(entries_,
                                                  Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

HermForm HermForm::operator+(const HermForm& other) const {
  if (other.dim() != dim()) throw ArgumentError("HermForm: dimension mismatch");
  return HermForm(ComplexMatrix(entries_ + other.entries_));
}

HermForm HermForm::operator*(double s) const {
  return HermForm(ComplexMatrix(entries_ * s));
}

EigenSpectrum gen_eigen(const HermForm& a, const HermForm& b) {
  if (a.dim() != b.dim()) throw ArgumentError("gen_eigen: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> bs(b.entries(),
                                                  Eigen::EigenvaluesOnly);
  const double bmin = bs.eigenvalues()(0);
  const double bmax = bs.eigenvalues()(b.dim() - 1);
  if (!(bmin > 0.0))
    throw GeometryError("gen_eigen: reference form is not positive definite",
                        bmin);
  Eigen::LLT<ComplexMatrix> llt(b.entries());
  const ComplexMatrix l = llt.matrixL();
  // C = L^{-1} A L^{-*}
  ComplexMatrix c = l.triangularView<Eigen::Lower>().solve(a.entries());
  c = l.triangularView<Eigen::Lower>().solve(ComplexMatrix(c.adjoint()));
  c = 0.5 * (c + c.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(c, Eigen::EigenvaluesOnly);
  return {es.eigenvalues(), bmax / bmin};
}

double mixed_wedge_ratio(const HermForm& a, const HermForm& b, int m, int n) {
  if (a.dim() != n || b.dim() != n)
    throw ArgumentError("mixed_wedge_ratio: dimension mismatch");
  if (m < 1 || m >= n) throw ArgumentError("mixed_wedge_ratio: need 1 <= m < n");
  const EigenSpectrum spec = gen_eigen(a, b);
  if (!(spec.values(0) > 0.0))
    throw GeometryError("mixed_wedge_ratio: form is not positive definite",
                        spec.values(0));
  const Eigen::VectorXd inv = spec.values.cwiseInverse();
  return n / binomial(n, m) * elem_sym(n - m, inv);
}

double mixed_discriminant(std::span<const HermForm> forms) {
  const auto n = static_cast<int>(forms.size());
  if (n == 0) throw ArgumentError("mixed_discriminant: empty argument list");
  for (const HermForm& f : forms)
    if (f.dim() != n)
      throw ArgumentError("mixed_discriminant: need n forms of size n x n");
  if (n > 16) throw ArgumentError("mixed_discriminant: n too large");
  // MD = sum over subsets S of (-1)^(n-|S|) det(sum_{k in S} A_k).
  Complex total = 0.0;
  const std::uint32_t subsets = 1u << n;
  ComplexMatrix sum(n, n);
  for (std::uint32_t s = 1; s < subsets; ++s) {
    sum.setZero();
    int size = 0;
    for (int k = 0; k < n; ++k)
      if (s & (1u << k)) {
        sum += forms[k].entries();
        ++size;
      }
    const Complex d = sum.determinant();
    total += ((n - size) % 2 == 0) ? d : -d;
  }
  return total.real();
}

double mixed_discriminant(std::initializer_list<FormPower> powers) {
  std::vector<HermForm> list;
  for (const FormPower& p : powers)
    for (int r = 0; r < p.exponent; ++r) list.push_back(*p.form);
  return mixed_discriminant(list);
}

Eigen::VectorXd cone_form_coefficients(const Eigen::VectorXd& mu, int m,
                                       double c) {
  const auto n = static_cast<int>(mu.size());
  if (m < 1 || m >= n) throw ArgumentError("cone_form_coefficients: need 1 <= m < n");
  for (int i = 0; i < n; ++i)
    if (!(mu(i) > 0.0))
      throw GeometryError("cone_form_coefficients: chi is not positive definite",
                          mu(i));
  const double weight = factorial(m) * factorial(n - m) / factorial(n - 1);
  Eigen::VectorXd kappa(n);
  for (int i = 0; i < n; ++i)
    kappa(i) = c * elem_sym_partial(n - 1, i, mu) -
               weight * elem_sym_partial(m - 1, i, mu);
  return kappa;
}

double wedge_coefficient(std::initializer_list<FormPower> powers) {
  int n = 0;
  for (const FormPower& p : powers) n += p.exponent;
  return mixed_discriminant(powers) / factorial(n);
}

}  // namespace jflow
