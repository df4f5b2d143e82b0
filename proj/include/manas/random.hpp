#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "manas/core.hpp"

namespace manas {

// Inverse-CDF draw from a discrete distribution. Consumes exactly one
// uniform so callers can reason about stream layout.
inline int sample_index(const std::vector<double>& probs, std::mt19937_64& rng) {
  if (probs.empty()) throw InputError("cannot sample from empty distribution");
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  int last_positive = -1;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] > 0.0) last_positive = static_cast<int>(k);
    acc += probs[k];
    if (u < acc) return static_cast<int>(k);
  }
  // u landed past the accumulated mass (rounding); return the last
  // index that carries probability.
  return last_positive >= 0 ? last_positive : static_cast<int>(probs.size()) - 1;
}

// Box-Muller standard normal: always consumes exactly two uniforms.
inline double normal_draw(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double u1 = unit(rng);
  double u2 = unit(rng);
  // Guard log(0); uniform_real_distribution may return 0 exactly.
  if (u1 <= 0.0) u1 = std::numeric_limits<double>::min();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline std::vector<int> random_permutation(int n, std::mt19937_64& rng) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

}  // namespace manas
