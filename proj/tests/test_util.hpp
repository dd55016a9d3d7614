#pragma once

// Shared generators and independent oracles for the test suites. Everything
// here is deliberately brute-force and implementation-independent.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "aggflow/aggflow.hpp"

namespace testutil {

using aggflow::Coupling;
using aggflow::ParticleMeasure;
using aggflow::Potential;
using aggflow::Rng;
using aggflow::Vec;

inline ParticleMeasure random_measure(Rng& rng, int n, int dim, double lo = -2.0, double hi = 2.0,
                                      bool uniform = false) {
  std::vector<Vec> pos;
  for (int i = 0; i < n; ++i) pos.push_back(rng.uniform_vec(dim, lo, hi));
  std::vector<double> mass = uniform ? std::vector<double>(n, 1.0 / n) : rng.simplex(n);
  return ParticleMeasure{std::move(pos), std::move(mass)};
}

// Dense grid minimisation of w(v) + (n/2)(z - v)^2 over v in [-span, span];
// the independent oracle for 1D Moreau envelopes.
inline double moreau_grid_oracle_1d(const std::function<double(double)>& w, double z, double n,
                                    double span = 3.0, double step = 1e-5) {
  double best = std::numeric_limits<double>::infinity();
  for (double v = -span; v <= span; v += step)
    best = std::min(best, w(v) + 0.5 * n * (z - v) * (z - v));
  return best;
}

// Two-level grid search for the 2D Moreau envelope oracle.
inline double moreau_grid_oracle_2d(const std::function<double(const Vec&)>& w, const Vec& z,
                                    double n, double span = 3.5) {
  double best = std::numeric_limits<double>::infinity();
  Vec argbest = z;
  const int coarse = 240;
  for (int a = 0; a <= coarse; ++a)
    for (int b = 0; b <= coarse; ++b) {
      const Vec v{-span + 2.0 * span * a / coarse, -span + 2.0 * span * b / coarse};
      const double val = w(v) + 0.5 * n * norm_sq(z - v);
      if (val < best) {
        best = val;
        argbest = v;
      }
    }
  const double h = 2.0 * span / coarse;
  const int fine = 200;
  for (int a = 0; a <= fine; ++a)
    for (int b = 0; b <= fine; ++b) {
      const Vec v{argbest[0] - h + 2.0 * h * a / fine, argbest[1] - h + 2.0 * h * b / fine};
      best = std::min(best, w(v) + 0.5 * n * norm_sq(z - v));
    }
  return best;
}

// Exact optimal transport cost for instances with two target atoms: the
// problem is a continuous knapsack in the first-column weights.
inline double lp_two_column_oracle(const ParticleMeasure& mu, const ParticleMeasure& nu) {
  const int m = mu.size();
  std::vector<double> gain(m);  // cost delta of routing mass to column 0 instead of 1
  double base = 0.0;
  for (int i = 0; i < m; ++i) {
    const double c0 = norm_sq(mu.positions[i] - nu.positions[0]);
    const double c1 = norm_sq(mu.positions[i] - nu.positions[1]);
    base += mu.masses[i] * c1;
    gain[i] = c0 - c1;
  }
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return gain[a] < gain[b]; });
  double budget = nu.masses[0];
  double cost2 = base;
  for (int i : order) {
    const double put = std::min(budget, mu.masses[i]);
    cost2 += put * gain[i];
    budget -= put;
    if (budget <= 0.0) break;
  }
  return std::sqrt(std::max(0.0, cost2));
}

// Exhaustive assignment minimum over all permutations (uniform masses).
inline double permutation_oracle(const ParticleMeasure& mu, const ParticleMeasure& nu) {
  const int n = mu.size();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (int i = 0; i < n; ++i) c += norm_sq(mu.positions[i] - nu.positions[perm[i]]) / n;
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::sqrt(best);
}

// Random element of a supported convex set (uniform-ish, always feasible).
inline Vec random_in_set(Rng& rng, const aggflow::ConvexSet& s) {
  using Kind = aggflow::ConvexSet::Kind;
  if (s.kind() == Kind::kSingleton) return s.vertices()[0];
  if (s.kind() == Kind::kSegment) {
    const double t = rng.uniform01();
    return (1.0 - t) * s.vertices()[0] + t * s.vertices()[1];
  }
  std::vector<double> w = rng.simplex(static_cast<int>(s.vertices().size()));
  Vec p = Vec::zero(s.dim());
  for (std::size_t k = 0; k < w.size(); ++k) p += w[k] * s.vertices()[k];
  return p;
}

// Random admissible coupling: start from the product plan and apply random
// rectangle perturbations, which preserve both marginals exactly.
inline Coupling random_coupling(Rng& rng, const ParticleMeasure& mu, const ParticleMeasure& nu,
                                int moves = 12) {
  const int m = mu.size(), n = nu.size();
  std::vector<std::vector<double>> g(m, std::vector<double>(n));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) g[i][j] = mu.masses[i] * nu.masses[j];
  if (m > 1 && n > 1) {
    for (int k = 0; k < moves; ++k) {
      const int i1 = rng.uniform_int(0, m - 1), i2 = rng.uniform_int(0, m - 1);
      const int j1 = rng.uniform_int(0, n - 1), j2 = rng.uniform_int(0, n - 1);
      if (i1 == i2 || j1 == j2) continue;
      const double cap = std::min(g[i1][j1], g[i2][j2]);
      const double d = rng.uniform(0.0, 0.9 * cap);
      g[i1][j1] -= d;
      g[i2][j2] -= d;
      g[i1][j2] += d;
      g[i2][j1] += d;
    }
  }
  std::vector<Coupling::Entry> entries;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      if (g[i][j] > 1e-15) entries.push_back({i, j, g[i][j]});
  return Coupling::create(mu, nu, std::move(entries));
}

// Randomises the free (kink) values of a selection within their sets; the
// result is an arbitrary admissible antisymmetric selection.
inline void randomize_selection(Rng& rng, aggflow::PairSelection& sel) {
  for (std::size_t k = 0; k < sel.vars.size(); ++k)
    sel.set_free_value(static_cast<int>(k), random_in_set(rng, sel.vars[k].set));
}

}  // namespace testutil
