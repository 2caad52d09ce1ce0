#include "jflow/setup.hpp"

#include <sstream>

namespace jflow {

namespace {

bool is_closed(const SymFormField& f) {
  return f.kahler_from_potential() || f.is_constant();
}

}  // namespace

double compute_c(const SymFormField& chi, const SymFormField& chi_tilde,
                 const SymFormField& omega, int m) {
  const int n = omega.dim();
  if (m < 1 || m >= n) throw ArgumentError("compute_c: need 1 <= m < n");
  const SymFormField background = chi + chi_tilde;
  const double denom = wedge_integral({{&background, n}}, omega);
  if (!(denom > 0.0))
    throw GeometryError("compute_c: chi + chi_tilde has non-positive volume", denom);
  const double numer = wedge_integral({{&background, m}, {&omega, n - m}}, omega);
  return n * numer / denom;
}

GeometrySetup GeometrySetup::create(SymFormField chi, SymFormField chi_tilde,
                                    SymFormField omega, int m, DiffScheme scheme,
                                    SetupChecks checks) {
  const int n = omega.dim();
  if (chi.dim() != n || chi_tilde.dim() != n || !(chi.grid() == omega.grid()) ||
      !(chi_tilde.grid() == omega.grid()))
    throw ArgumentError("GeometrySetup: fields live on different grids");
  if (m < 1 || m >= n) throw ArgumentError("GeometrySetup: need 1 <= m < n");

  GeometrySetup s(std::move(chi), std::move(chi_tilde), std::move(omega));
  s.m_ = m;
  s.scheme_ = scheme;
  s.frame_ = std::make_shared<const ReferenceFrame>(s.omega_);
  s.diff_ = Differentiator::get(s.grid().points_per_axis(), scheme);
  s.closed_ = is_closed(s.chi_) && is_closed(s.chi_tilde_);

  const Eigen::VectorXd chi_min = relative_min_eigenvalue(s.chi_, *s.frame_);
  Index arg = 0;
  if (const double lo = chi_min.minCoeff(&arg); !(lo > 0.0))
    throw GeometryError("GeometrySetup: chi is not positive definite", lo, arg);
  const Eigen::VectorXd tilde_min = relative_min_eigenvalue(s.chi_tilde_, *s.frame_);
  if (const double lo = tilde_min.minCoeff(&arg); lo < -1e-12)
    throw GeometryError("GeometrySetup: chi_tilde is not semipositive", lo, arg);
  if (checks.require_big) {
    const double big = wedge_integral({{&s.chi_tilde_, n}}, s.omega_);
    if (!(big > 0.0))
      throw GeometryError("GeometrySetup: chi_tilde is not big", big);
  }
  s.volume_ = wedge_integral({{&s.background_, n}}, s.omega_);
  s.c_ = compute_c(s.chi_, s.chi_tilde_, s.omega_, m);
  if (!(s.c_ > 0.0)) throw GeometryError("GeometrySetup: c is not positive", s.c_);
  return s;
}

SymFormField total_form(const GeometrySetup& setup, const ScalarField& phi) {
  if (!(phi.grid() == setup.grid()))
    throw ArgumentError("total_form: potential lives on a different grid");
  SymFormField x = setup.background() + complex_hessian(phi, setup.scheme());
  return x;
}

std::pair<bool, double> admissible(const GeometrySetup& setup, const ScalarField& phi) {
  const SymFormField x = total_form(setup, phi);
  const double lo = relative_min_eigenvalue(x, setup.frame()).minCoeff();
  return {lo > 0.0, lo};
}

}  // namespace jflow
