#include "jflow/state.hpp"

#include <algorithm>
#include <sstream>

namespace jflow {

namespace detail {

bool rhs_from_elem_sym(const Eigen::MatrixXd& elem_sym, int n, int m, double c,
                       Eigen::VectorXd& rhs, Index& bad_point) {
  const double weight = n / binomial(n, m);
  rhs.resize(elem_sym.cols());
  for (Index p = 0; p < elem_sym.cols(); ++p) {
    // A symmetric matrix is positive definite iff all e_k of its spectrum are
    // positive (the characteristic polynomial then has no root in (-inf, 0]).
    for (int k = 1; k <= n; ++k)
      if (!(elem_sym(k, p) > 0.0)) {
        bad_point = p;
        return false;
      }
    rhs(p) = c - weight * elem_sym(m, p) / elem_sym(n, p);
  }
  return true;
}

}  // namespace detail

FlowState make_state(const GeometrySetup& setup, ScalarField phi, double t) {
  if (!phi.all_finite()) throw GeometryError("make_state: non-finite potential", 0.0);
  FlowState s{std::move(phi), t, total_form(setup, s.phi), ScalarField(setup.grid()),
              ScalarField(setup.grid()), Eigen::MatrixXd(), 0.0, 0};
  s.elem_sym = relative_elem_sym(s.x, setup.frame());
  Index bad = 0;
  if (!detail::rhs_from_elem_sym(s.elem_sym, setup.n(), setup.m(), setup.c(),
                                 s.dphi_dt.data(), bad)) {
    const double lo = relative_min_eigenvalue(s.x, setup.frame())(bad);
    std::ostringstream os;
    os << "admissibility lost at grid point " << bad << " (min eigenvalue " << lo << ")";
    throw GeometryError(os.str(), lo, bad);
  }
  s.w.data() = s.elem_sym.row(1).transpose();
  const Eigen::VectorXd lo = relative_min_eigenvalue(s.x, setup.frame());
  s.min_eigenvalue = lo.minCoeff(&s.min_point);

  // Frozen-coefficient bound: the linearization is (n/binom(n,m)) (1/4)
  // sum G_jk d_j d_k with |G| <= max_i a_i / lambda_min(omega) and
  // a_i = e_{n-m-1}(1/lambda minus i) / lambda_i^2 <= e_{m+1} / (e_n lambda_min^2).
  const int n = setup.n();
  const int m = setup.m();
  double a_max = 0.0;
  for (Index p = 0; p < lo.size(); ++p)
    a_max = std::max(a_max, s.elem_sym(m + 1, p) / s.elem_sym(n, p) / (lo(p) * lo(p)));
  s.stiffness = n / binomial(n, m) * 0.25 * n *
                setup.differentiator().second_spectral_radius() * a_max /
                setup.frame().min_eigenvalue();
  return s;
}

ScalarField flow_rhs(const FlowState& state, const GeometrySetup& setup) {
  const Eigen::MatrixXd e = relative_elem_sym(state.x, setup.frame());
  ScalarField out(setup.grid());
  Index bad = 0;
  if (!detail::rhs_from_elem_sym(e, setup.n(), setup.m(), setup.c(), out.data(), bad)) {
    const double lo = relative_min_eigenvalue(state.x, setup.frame())(bad);
    throw GeometryError("flow_rhs: admissibility lost", lo, bad);
  }
  return out;
}

Eigen::VectorXd volume_ratio(const FlowState& state, const GeometrySetup& setup) {
  const int n = setup.n();
  const int m = setup.m();
  return (binomial(n, m) * state.elem_sym.row(n).array() / state.elem_sym.row(m).array())
      .matrix()
      .transpose();
}

}  // namespace jflow
