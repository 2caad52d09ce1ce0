#include "jflow/random.hpp"

namespace jflow {

HermForm random_pd_form(int n, Rng& rng, double floor, bool real_only) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double re = normal(rng);
      const double im = real_only ? 0.0 : normal(rng);
      g(i, j) = Complex(re, im);
    }
  ComplexMatrix h = g * g.adjoint() / static_cast<double>(n);
  h.diagonal().array() += floor;
  return HermForm(h);
}

ComplexMatrix random_invertible(int n, Rng& rng) {
  std::uniform_real_distribution<double> uniform(-0.5, 0.5);
  ComplexMatrix p = ComplexMatrix::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p(i, j) += Complex(uniform(rng), uniform(rng)) / static_cast<double>(n);
  return p;
}

}  // namespace jflow
