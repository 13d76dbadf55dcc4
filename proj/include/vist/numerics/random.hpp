#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "vist/numerics/tensor.hpp"

namespace vist {

// Seeded engine used everywhere. The conversions below are written out by
// hand because the <random> distributions are implementation-defined, and
// checkpoints must be reproducible across standard libraries.
using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

// Unbiased integer in [0, n).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

inline double standard_normal(Rng& rng) {
  // Box-Muller; the second variate is discarded to keep the stream simple.
  double u1;
  do {
    u1 = uniform01(rng);
  } while (u1 <= 0.0);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

template <typename T>
void fill_uniform(Matrix<T>& m, Rng& rng, double scale) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      m(i, j) = static_cast<T>(uniform(rng, -scale, scale));
    }
  }
}

template <typename T>
void fill_uniform(Vector<T>& v, Rng& rng, double scale) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = static_cast<T>(uniform(rng, -scale, scale));
  }
}

template <typename E>
void shuffle(std::vector<E>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace vist
