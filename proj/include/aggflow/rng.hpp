#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "aggflow/vec.hpp"

namespace aggflow {

// Seeded generator with platform-independent uniform doubles (the raw 53-bit
// mantissa construction, not std::uniform_real_distribution, so that summaries
// are reproducible byte for byte).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

  // inclusive bounds
  int uniform_int(int lo, int hi) {
    const int span = hi - lo + 1;
    int k = static_cast<int>(uniform01() * span);
    if (k >= span) k = span - 1;
    return lo + k;
  }

  Vec uniform_vec(int dim, double lo, double hi) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = uniform(lo, hi);
    return v;
  }

  // strictly positive weights summing to one
  std::vector<double> simplex(int n, double floor_weight = 0.05) {
    std::vector<double> w(n);
    double s = 0.0;
    for (double& x : w) {
      x = floor_weight + uniform01();
      s += x;
    }
    for (double& x : w) x /= s;
    return w;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace aggflow
