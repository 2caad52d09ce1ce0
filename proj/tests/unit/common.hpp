#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "jflow/grid.hpp"
#include "jflow/random.hpp"

namespace testing {

/// sum of amp * cos(2 pi k.x + phase) over a few random low modes.
inline jflow::ScalarField random_trig(const jflow::PeriodicGrid& grid, jflow::Rng& rng,
                                      double amplitude, int modes = 4, int kmax = 2) {
  std::uniform_int_distribution<int> wave(-kmax, kmax);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  struct Mode {
    std::vector<int> k;
    double a, ph;
  };
  std::vector<Mode> list;
  for (int q = 0; q < modes; ++q) {
    Mode m;
    for (int j = 0; j < grid.n(); ++j) m.k.push_back(wave(rng));
    m.a = amplitude * unit(rng);
    m.ph = std::numbers::pi * unit(rng);
    list.push_back(m);
  }
  return jflow::ScalarField::from_function(grid, [&](const Eigen::VectorXd& x) {
    double v = 0.0;
    for (const Mode& m : list) {
      double arg = m.ph;
      for (int j = 0; j < grid.n(); ++j) arg += 2.0 * std::numbers::pi * m.k[j] * x(j);
      v += m.a * std::cos(arg);
    }
    return v;
  });
}

inline double sup_norm(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace testing
