#pragma once

#include <memory>
#include <utility>

#include "jflow/geometry.hpp"

namespace jflow {

/// Which setup invariants to enforce on construction.
struct SetupChecks {
  bool require_big = true;  // int chi_tilde^n > 0
};

/// The geometric data of one flow problem: chi (Kahler), chi_tilde
/// (semipositive, big), omega (reference), the degree m and the derived
/// constant c = n int (chi + chi_tilde)^m ^ omega^(n-m) / int (chi + chi_tilde)^n.
class GeometrySetup {
 public:
  static GeometrySetup create(SymFormField chi, SymFormField chi_tilde,
                              SymFormField omega, int m,
                              DiffScheme scheme = DiffScheme::kSpectral,
                              SetupChecks checks = {});

  const PeriodicGrid& grid() const { return chi_.grid(); }
  int n() const { return chi_.dim(); }
  int m() const { return m_; }
  double c() const { return c_; }
  DiffScheme scheme() const { return scheme_; }

  const SymFormField& chi() const { return chi_; }
  const SymFormField& chi_tilde() const { return chi_tilde_; }
  const SymFormField& omega() const { return omega_; }
  /// chi + chi_tilde, the background form of the flow.
  const SymFormField& background() const { return background_; }
  const ReferenceFrame& frame() const { return *frame_; }
  const Differentiator& differentiator() const { return *diff_; }

  /// int (chi + chi_tilde)^n.
  double volume() const { return volume_; }

  /// False for setups built from position-dependent forms that are not
  /// realized as constant + complex Hessian; conservation checks that rely on
  /// closedness do not apply to those.
  bool closed() const { return closed_; }

 private:
  GeometrySetup(SymFormField chi, SymFormField chi_tilde, SymFormField omega)
      : chi_(std::move(chi)),
        chi_tilde_(std::move(chi_tilde)),
        omega_(std::move(omega)),
        background_(chi_ + chi_tilde_) {}

  SymFormField chi_;
  SymFormField chi_tilde_;
  SymFormField omega_;
  SymFormField background_;
  std::shared_ptr<const ReferenceFrame> frame_;
  std::shared_ptr<const Differentiator> diff_;
  int m_ = 1;
  double c_ = 0.0;
  double volume_ = 0.0;
  bool closed_ = true;
  DiffScheme scheme_ = DiffScheme::kSpectral;
};

/// n int (chi+chi_tilde)^m ^ omega^(n-m) / int (chi+chi_tilde)^n. Throws
/// GeometryError when the denominator is not positive.
double compute_c(const SymFormField& chi, const SymFormField& chi_tilde,
                 const SymFormField& omega, int m);

/// Whether chi + chi_tilde + i ddbar(phi) is positive definite at every grid
/// point, together with the global minimum of its eigenvalues relative to omega.
std::pair<bool, double> admissible(const GeometrySetup& setup, const ScalarField& phi);

/// chi + chi_tilde + i ddbar(phi).
SymFormField total_form(const GeometrySetup& setup, const ScalarField& phi);

}  // namespace jflow
