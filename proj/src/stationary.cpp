#include "jflow/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "jflow/functionals.hpp"
#include "jflow/parallel.hpp"

namespace jflow {

namespace {

double sup_abs(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

double mean(const Eigen::VectorXd& v) {
  return pairwise_sum(v) / static_cast<double>(v.size());
}

}  // namespace

LinearizationCoefficients linearization_coefficients(const FlowState& state,
                                                     const GeometrySetup& setup) {
  const int n = setup.n();
  const int k = n - setup.m() - 1;
  LinearizationCoefficients out{Eigen::MatrixXd(n, state.x.size()),
                                relative_eigenframe(state.x, setup.frame())};
  Index bad = 0;
  if (const double lo = out.frame.values.row(0).minCoeff(&bad); !(lo > 0.0))
    throw GeometryError("linearization_coefficients: state is not admissible", lo, bad);
  parallel_for(state.x.size(), [&](Index b, Index e) {
    Eigen::VectorXd mu(n);
    for (Index p = b; p < e; ++p) {
      mu = out.frame.values.col(p).cwiseInverse();
      for (int i = 0; i < n; ++i) out.a(i, p) = elem_sym_partial(k, i, mu) * mu(i) * mu(i);
    }
  });
  return out;
}

LinearizedOperator::LinearizedOperator(const FlowState& state, const GeometrySetup& setup)
    : setup_(&setup), coeff_(linearization_coefficients(state, setup)) {
  const int n = setup.n();
  const Index size = state.x.size();
  const double weight = n / binomial(n, setup.m()) * 0.25;
  g_.assign(static_cast<std::size_t>(n * (n + 1) / 2), Eigen::VectorXd(size));
  Eigen::VectorXd trace(size);
  for (Index p = 0; p < size; ++p) {
    const Eigen::Map<const Eigen::MatrixXd> v(coeff_.frame.vectors.col(p).data(), n, n);
    const Eigen::MatrixXd g = v * coeff_.a.col(p).asDiagonal() * v.transpose();
    for (int j = 0; j < n; ++j)
      for (int l = j; l < n; ++l)
        g_[static_cast<std::size_t>(Differentiator::component_index(n, j, l))](p) =
            (j == l ? 1.0 : 2.0) * weight * g(j, l);
    trace(p) = weight * g.trace() / n;
  }
  mean_scale_ = mean(trace);
  conditioning_ = coeff_.a.maxCoeff() / coeff_.a.minCoeff();
}

Eigen::VectorXd LinearizedOperator::apply(const Eigen::VectorXd& d) const {
  std::vector<Eigen::VectorXd> comps;
  setup_->differentiator().hessian(setup_->grid(), d, comps);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(d.size());
  for (std::size_t c = 0; c < comps.size(); ++c) out.array() += g_[c].array() * comps[c].array();
  return out;
}

Eigen::VectorXd LinearizedOperator::precondition(const Eigen::VectorXd& f) const {
  return setup_->differentiator().inverse_laplacian(setup_->grid(), f) / mean_scale_;
}

EllipticSolution solve_elliptic(const GeometrySetup& setup, const ScalarField& init,
                                const NewtonOptions& options) {
  if (!(options.tol > 0.0)) throw ArgumentError("solve_elliptic: tol must be positive");
  std::optional<FlowState> state;
  try {
    state = make_state(setup, init, 0.0);
  } catch (const GeometryError& e) {
    throw PreconditionError(std::string("solve_elliptic: initial potential is not admissible: ") +
                            e.what());
  }
  EllipticSolution sol{init, sup_abs(state->dphi_dt.data()), 0, 0.0, {}, {}};
  sol.residual_history.push_back(sol.residual_norm);
  const int n = setup.n();

  while (sol.residual_norm >= options.tol) {
    if (sol.newton_iterations >= options.max_iterations)
      throw NonconvergenceError("solve_elliptic: iteration limit reached", state->phi,
                                sol.residual_norm);
    const LinearizedOperator op(*state, setup);
    // Gauge: increments are zero-mean and residuals are projected along
    // constants against the measure X^n (a bordered system in disguise).
    Eigen::VectorXd nu(state->x.size());
    for (Index p = 0; p < nu.size(); ++p) nu(p) = state->elem_sym(n, p) * setup.frame().det(p);
    const double nu_total = pairwise_sum(nu);
    auto project = [&](Eigen::VectorXd f) {
      const Eigen::VectorXd weighted = (f.array() * nu.array()).matrix();
      f.array() -= pairwise_sum(weighted) / nu_total;
      return f;
    };
    const Eigen::VectorXd rhs = project(-state->dphi_dt.data());
    const double rel_tol = std::clamp(0.1 * sol.residual_norm, 1e-13, 1e-4);
    GmresResult lin = gmres([&](const Eigen::VectorXd& x) { return project(op.apply(x)); },
                            [&](const Eigen::VectorXd& y) { return op.precondition(y); }, rhs,
                            rel_tol);
    Eigen::VectorXd delta = std::move(lin.x);
    delta.array() -= mean(delta);
    sol.increment_means.push_back(mean(delta));

    double alpha = 1.0;
    bool accepted = false;
    for (int attempt = 0; attempt < options.max_line_search; ++attempt, alpha *= options.backtrack) {
      const Eigen::VectorXd trial = state->phi.data() + alpha * delta;
      if (!trial.allFinite()) continue;
      try {
        FlowState next = make_state(setup, ScalarField(setup.grid(), trial), 0.0);
        const double res = sup_abs(next.dphi_dt.data());
        if (res <= options.decrease * sol.residual_norm) {
          state = std::move(next);
          sol.residual_norm = res;
          accepted = true;
          break;
        }
      } catch (const GeometryError&) {
      }
    }
    ++sol.newton_iterations;
    if (!accepted) {
      std::ostringstream os;
      os << "solve_elliptic: line search failed " << options.max_line_search
         << " times at residual " << sol.residual_norm;
      throw NonconvergenceError(os.str(), state->phi, sol.residual_norm);
    }
    sol.residual_history.push_back(sol.residual_norm);
  }
  sol.linearization_conditioning = LinearizedOperator(*state, setup).conditioning();
  Eigen::VectorXd psi = state->phi.data();
  psi.array() -= psi.maxCoeff();
  sol.psi = ScalarField(setup.grid(), std::move(psi));
  return sol;
}

FlowLimitComparison compare_flow_limit(const ScalarField& phi_end, const EllipticSolution& sol,
                                       const GeometrySetup& setup, const AmpMask& mask,
                                       double jn_target) {
  const int n = setup.n();
  FlowLimitComparison out;
  out.jn_target = jn_target;
  // J_n(psi + K) = J_n(psi) + K int (chi + chi_tilde)^n; a few Newton passes
  // absorb the quadrature's departure from exact linearity.
  double k = 0.0;
  for (int it = 0; it < 4; ++it) {
    const double value = j_functional(n, sol.psi + k, setup);
    k += (jn_target - value) / setup.volume();
  }
  out.shift = k;
  out.jn_matched = j_functional(n, sol.psi + k, setup);

  const Eigen::VectorXd d = phi_end.data() - sol.psi.data();
  const bool all = mask.empty();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, sup = 0.0;
  for (Index p = 0; p < d.size(); ++p) {
    if (!all && !mask.mask[static_cast<std::size_t>(p)]) continue;
    lo = std::min(lo, d(p));
    hi = std::max(hi, d(p));
    sup = std::max(sup, std::abs(d(p) - k));
  }
  out.spread = hi - lo;
  out.sup_difference = sup;
  return out;
}

}  // namespace jflow
