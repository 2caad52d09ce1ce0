#include "jflow/functionals.hpp"

#include <sstream>

namespace jflow {

namespace {

// Weighted integrals int u X_u^a ^ B^b ^ omega^(n-a-b) for a + b <= n, with
// B = chi + chi_tilde.
class WeightedWedges {
 public:
  WeightedWedges(const ScalarField& u, const GeometrySetup& setup)
      : n_(setup.n()), values_((n_ + 1) * (n_ + 1), 0.0) {
    if (!(u.grid() == setup.grid()))
      throw ArgumentError("functional: potential lives on a different grid");
    const SymFormField x = total_form(setup, u);
    const Eigen::VectorXd lo = relative_min_eigenvalue(x, setup.frame());
    Index arg = 0;
    if (const double v = lo.minCoeff(&arg); !(v > 0.0)) {
      std::ostringstream os;
      os << "functional: potential is not admissible at grid point " << arg;
      throw GeometryError(os.str(), v, arg);
    }
    const MixedWedgeTable table(x, setup.background(), setup.frame());
    for (int a = 0; a <= n_; ++a)
      for (int b = 0; a + b <= n_; ++b) {
        const Eigen::VectorXd density =
            (u.data().array() * table.coefficient(a, b).array()).matrix();
        values_[a * (n_ + 1) + b] = integrate(setup.grid(), density);
      }
  }

  double operator()(int a, int b) const { return values_[a * (n_ + 1) + b]; }

  double j(int i) const {
    double s = 0.0;
    for (int k = 0; k <= i; ++k) s += (*this)(k, i - k);
    return s / (i + 1);
  }

 private:
  int n_;
  std::vector<double> values_;
};

}  // namespace

FunctionalValues evaluate_functionals(const ScalarField& u, const GeometrySetup& setup) {
  const WeightedWedges w(u, setup);
  const int n = setup.n();
  FunctionalValues out;
  out.j.resize(n + 1);
  for (int i = 0; i <= n; ++i) out.j[i] = w.j(i);
  out.combined = setup.c() * out.j[n] - n * out.j[setup.m()];
  for (int i = 0; i <= n; ++i) out.theorem_norm += w(i, n - i);
  return out;
}

double j_functional(int i, const ScalarField& u, const GeometrySetup& setup) {
  if (i < 0 || i > setup.n()) throw ArgumentError("j_functional: index out of range");
  return WeightedWedges(u, setup).j(i);
}

double combined_functional(const ScalarField& u, const GeometrySetup& setup) {
  return evaluate_functionals(u, setup).combined;
}

double theorem_normalization(const ScalarField& u, const GeometrySetup& setup) {
  return evaluate_functionals(u, setup).theorem_norm;
}

double dissipation(const FlowState& state, const GeometrySetup& setup) {
  const int n = setup.n();
  Eigen::VectorXd density(state.phi.data().size());
  for (Index p = 0; p < density.size(); ++p) {
    const double v = state.dphi_dt[p];
    density(p) = v * v * state.elem_sym(n, p) * setup.frame().det(p);
  }
  return integrate(setup.grid(), density);
}

void FunctionalLedger::append(FunctionalRow row) {
  if (!rows_.empty() && !(row.t > rows_.back().t))
    throw ArgumentError("FunctionalLedger: rows must have increasing t");
  rows_.push_back(std::move(row));
}

}  // namespace jflow
