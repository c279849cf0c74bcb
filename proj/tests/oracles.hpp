// Test-only brute-force oracles, independent of the library's evaluation
// paths: dense grid minimization/maximization and composite Simpson
// quadrature. Deliberately slow and simple.

#pragma once

#include <cmath>
#include <functional>
#include <limits>

namespace oracle {

// min over an s-grid of f(s), s in [lo, hi].
inline double grid_min(const std::function<double(double)>& f, double lo,
                       double hi, int n = 200001) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double s = lo + (hi - lo) * i / (n - 1);
    best = std::min(best, f(s));
  }
  return best;
}

inline double grid_max(const std::function<double(double)>& f, double lo,
                       double hi, int n = 200001) {
  return -grid_min([&](double s) { return -f(s); }, lo, hi, n);
}

// Composite Simpson rule on [lo, hi].
inline double simpson(const std::function<double(double)>& f, double lo,
                      double hi, int panels = 20000) {
  const double h = (hi - lo) / panels;
  double sum = f(lo) + f(hi);
  for (int i = 1; i < panels; ++i)
    sum += f(lo + i * h) * (i % 2 == 0 ? 2.0 : 4.0);
  return sum * h / 3.0;
}

}  // namespace oracle
