#pragma once

// Shared helpers for the unit tests: a derivative-free line search used by
// the brute-force prox oracles, and small random generators for property tests.

#include "aadmm/numkit.hpp"

#include <cmath>
#include <cstdint>
#include <functional>

namespace aadmm::testing {

// Minimizes a convex scalar function on [lo, hi] by golden-section search.
inline double golden_min(const std::function<double(double)>& f, double lo, double hi,
                         int iters = 200) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters && b - a > 1e-15 * (1.0 + std::abs(a) + std::abs(b)); ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// 10^U(lo, hi)
inline double log_uniform(SeededRng& rng, double lo, double hi) {
  return std::pow(10.0, rng.uniform(lo, hi));
}

// Random symmetric PSD matrix with the given rank (full rank by default).
inline Matrix random_psd(SeededRng& rng, Eigen::Index n, Eigen::Index rank = -1) {
  const Matrix g = rng.normal_matrix(n, rank < 0 ? n : rank);
  return g * g.transpose();
}

// Vector whose entries span several orders of magnitude, with a few exact
// zeros, to stress thresholding code.
inline Vector spread_vector(SeededRng& rng, Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v(i) = rng.below(8) == 0 ? 0.0 : rng.normal() * log_uniform(rng, -3.0, 3.0);
  }
  return v;
}

}  // namespace aadmm::testing
