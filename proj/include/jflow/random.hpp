#pragma once

#include <random>

#include "jflow/herm.hpp"

namespace jflow {

using Rng = std::mt19937_64;

/// G G* + floor I with G complex Gaussian (real Gaussian when real_only).
HermForm random_pd_form(int n, Rng& rng, double floor = 0.1, bool real_only = false);

/// Random invertible matrix with condition number bounded by construction.
ComplexMatrix random_invertible(int n, Rng& rng);

}  // namespace jflow
