#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "aggflow/measure.hpp"

namespace aggflow {

// Exact quadratic Wasserstein distance in 1D via the monotone (quantile)
// coupling of the sorted atoms with mass splitting at CDF breakpoints.
// Position ties are broken by input order.
inline std::pair<double, Coupling> wasserstein_1d(const ParticleMeasure& mu, const ParticleMeasure& nu) {
  if (mu.dim() != 1 || nu.dim() != 1) throw std::invalid_argument("wasserstein_1d: measures must be 1D");
  std::vector<int> a(mu.size()), b(nu.size());
  std::iota(a.begin(), a.end(), 0);
  std::iota(b.begin(), b.end(), 0);
  std::stable_sort(a.begin(), a.end(),
                   [&](int i, int j) { return mu.positions[i][0] < mu.positions[j][0]; });
  std::stable_sort(b.begin(), b.end(),
                   [&](int i, int j) { return nu.positions[i][0] < nu.positions[j][0]; });
  std::vector<Coupling::Entry> entries;
  double cost2 = 0.0;
  std::size_t ia = 0, ib = 0;
  double ra = mu.masses[a[0]], rb = nu.masses[b[0]];
  while (ia < a.size() && ib < b.size()) {
    const double w = std::min(ra, rb);
    if (w > 0.0) {
      const double d = mu.positions[a[ia]][0] - nu.positions[b[ib]][0];
      cost2 += w * d * d;
      entries.push_back({a[ia], b[ib], w});
    }
    ra -= w;
    rb -= w;
    if (ra <= 0.0) {
      if (++ia < a.size()) ra = mu.masses[a[ia]];
    }
    if (rb <= 0.0) {
      if (++ib < b.size()) rb = nu.masses[b[ib]];
    }
  }
  return {std::sqrt(cost2), Coupling::create(mu, nu, std::move(entries))};
}

namespace detail {

// Shortest-augmenting-path assignment (Jonker-Volgenant potentials variant),
// O(n^3) on a dense square cost matrix. Returns row -> column.
inline std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace detail

// Exact quadratic Wasserstein distance for equal atom counts with uniform
// masses 1/N on both sides, via optimal assignment on squared distances.
inline std::pair<double, Coupling> wasserstein_assignment(const ParticleMeasure& mu,
                                                          const ParticleMeasure& nu) {
  if (mu.size() != nu.size())
    throw std::invalid_argument("wasserstein_assignment: atom counts must be equal");
  if (mu.dim() != nu.dim()) throw std::invalid_argument("wasserstein_assignment: dimension mismatch");
  if (!mu.uniform_masses() || !nu.uniform_masses())
    throw std::invalid_argument("wasserstein_assignment: masses must be uniform 1/N");
  const int n = mu.size();
  std::vector<std::vector<double>> cost(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) cost[i][j] = norm_sq(mu.positions[i] - nu.positions[j]);
  const std::vector<int> match = detail::solve_assignment(cost);
  const double w = 1.0 / n;
  double cost2 = 0.0;
  std::vector<Coupling::Entry> entries;
  for (int i = 0; i < n; ++i) {
    cost2 += w * cost[i][match[i]];
    entries.push_back({i, match[i], w});
  }
  return {std::sqrt(cost2), Coupling::create(mu, nu, std::move(entries))};
}

// Dispatch: exact transport where this library supports it.
inline std::pair<double, Coupling> wasserstein(const ParticleMeasure& mu, const ParticleMeasure& nu) {
  if (mu.dim() == 1 && nu.dim() == 1) return wasserstein_1d(mu, nu);
  if (mu.size() == nu.size() && mu.uniform_masses() && nu.uniform_masses())
    return wasserstein_assignment(mu, nu);
  throw std::invalid_argument(
      "wasserstein: only 1D measures or equal-count uniform-mass measures are supported");
}

}  // namespace aggflow
