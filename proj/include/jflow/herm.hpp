#pragma once

// Pointwise algebra of Hermitian (1,1)-forms: generalized eigenvalues,
// elementary symmetric polynomials, mixed discriminants and the wedge-product
// coefficients built from them.
//
// Wedge normalization used throughout: for forms A_1..A_n on C^n,
//   A_1 ^ ... ^ A_n = MD(A_1, ..., A_n) dV,   MD(A,...,A) = n! det(A),
// so A^n = n! det(A) dV and, in a frame where B = I and A = diag(lambda),
//   A^k ^ B^(n-k) / B^n = e_k(lambda) / binom(n, k).

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "jflow/errors.hpp"

namespace jflow {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

/// Deliberate defects for detector sanity checks of the verification suite.
namespace fault {
enum class Fault { kNone, kElemSymPartialSign };
void inject(Fault f);
Fault active();
namespace detail {
inline bool flip_elem_sym_partial = false;
}
}  // namespace fault

double binomial(int n, int k);
double factorial(int n);

/// n x n Hermitian matrix representing a real (1,1)-form at a point.
/// Construction symmetrizes inputs that are Hermitian up to 1e-12 and rejects
/// anything further off.
class HermForm {
 public:
  static constexpr double kSymmetrizeTol = 1e-12;

  HermForm() = default;
  explicit HermForm(const ComplexMatrix& entries);
  explicit HermForm(const Eigen::MatrixXd& real_entries);

  static HermForm identity(int n);
  static HermForm diagonal(const Eigen::VectorXd& d);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const ComplexMatrix& entries() const { return entries_; }
  Complex operator()(int i, int j) const { return entries_(i, j); }

  /// Smallest eigenvalue of the matrix itself (relative to the identity).
  double min_eigenvalue() const;

  HermForm operator+(const HermForm& other) const;
  HermForm operator*(double s) const;

 private:
  ComplexMatrix entries_;
};

struct EigenSpectrum {
  Eigen::VectorXd values;          // ascending
  double basis_conditioning = 1.0;  // condition number of the reference form
};

// ---------------------------------------------------------------------------
// Elementary symmetric polynomials

/// All of e_0(values) .. e_n(values) by the one-entry-at-a-time recurrence
/// e_k(l, x) = e_k(l) + x e_{k-1}(l).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> elem_sym_all(
    const Eigen::MatrixBase<Derived>& values) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = values.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> e =
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n + 1);
  e(0) = Scalar(1);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = j + 1; k >= 1; --k) e(k) += values(j) * e(k - 1);
  }
  return e;
}

template <typename Derived>
typename Derived::Scalar elem_sym(int k,
                                  const Eigen::MatrixBase<Derived>& values) {
  if (k < 0 || k > values.size())
    throw ArgumentError("elem_sym: k out of range");
  using Scalar = typename Derived::Scalar;
  // Truncated recurrence: only e_0..e_k are needed.
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> e =
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(k + 1);
  e(0) = Scalar(1);
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    for (int r = std::min<int>(k, static_cast<int>(j) + 1); r >= 1; --r)
      e(r) += values(j) * e(r - 1);
  }
  return e(k);
}

/// e_k of `values` with entry i removed.
template <typename Derived>
typename Derived::Scalar elem_sym_partial(
    int k, int i, const Eigen::MatrixBase<Derived>& values) {
  const auto n = static_cast<int>(values.size());
  if (i < 0 || i >= n) throw ArgumentError("elem_sym_partial: index out of range");
  if (k < 0 || k > n - 1) throw ArgumentError("elem_sym_partial: k out of range");
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> rest(n - 1);
  for (int j = 0, r = 0; j < n; ++j)
    if (j != i) rest(r++) = values(j);
  if (fault::detail::flip_elem_sym_partial) return -elem_sym(k, rest);
  return elem_sym(k, rest);
}

inline double elem_sym(int k, std::span<const double> values) {
  return elem_sym(k, Eigen::Map<const Eigen::VectorXd>(
                         values.data(), static_cast<Eigen::Index>(values.size())));
}

inline double elem_sym_partial(int k, int i, std::span<const double> values) {
  return elem_sym_partial(
      k, i,
      Eigen::Map<const Eigen::VectorXd>(values.data(),
                                        static_cast<Eigen::Index>(values.size())));
}

// ---------------------------------------------------------------------------
// Generalized eigenproblems and wedge coefficients

/// Roots of det(A - lambda B) for B positive definite, via Cholesky of B and
/// a Hermitian eigensolve of L^{-1} A L^{-*}. Throws GeometryError carrying
/// the smallest eigenvalue of B when B is not positive definite.
EigenSpectrum gen_eigen(const HermForm& a, const HermForm& b);

/// n (A^m ^ B^(n-m)) / A^n = (n / binom(n,m)) e_{n-m}(1/lambda(A,B)).
double mixed_wedge_ratio(const HermForm& a, const HermForm& b, int m, int n);

/// Full polarization of the determinant: the coefficient of t_1...t_n in
/// det(sum_k t_k A_k), by inclusion-exclusion over subsets. MD(A,..,A) = n! det A.
double mixed_discriminant(std::span<const HermForm> forms);

/// Convenience: MD with repeated arguments, e.g. {{A, 2}, {B, 1}}.
struct FormPower {
  const HermForm* form;
  int exponent;
};
double mixed_discriminant(std::initializer_list<FormPower> powers);

/// Coefficients kappa_i of c chi^(n-1) - m chi^(m-1) ^ omega^(n-m) in the frame
/// where omega = I and chi = diag(mu), up to the common positive factor (n-1)!:
///   kappa_i = c e_{n-1}(mu\i) - (m! (n-m)! / (n-1)!) e_{m-1}(mu\i).
Eigen::VectorXd cone_form_coefficients(const Eigen::VectorXd& mu, int m,
                                       double c);

/// Normalized wedge coefficient (A_1 ^ ... ^ A_n) / (n! dV) = MD / n!.
/// With A_k = identity this is 1, so integrating over the unit torus gives
/// int omega^n = 1 for omega = I.
double wedge_coefficient(std::initializer_list<FormPower> powers);

}  // namespace jflow
