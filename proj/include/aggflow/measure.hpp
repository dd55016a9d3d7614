#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "aggflow/vec.hpp"

namespace aggflow {

// Atomic probability measure: positions with positive masses summing to one.
struct ParticleMeasure {
  std::vector<Vec> positions;
  std::vector<double> masses;

  int size() const { return static_cast<int>(positions.size()); }
  int dim() const { return positions.front().dim(); }

  void validate() const {
    if (positions.empty() || positions.size() != masses.size())
      throw std::invalid_argument("ParticleMeasure: need matching, non-empty atom lists");
    const int d = positions.front().dim();
    for (const Vec& p : positions)
      if (p.dim() != d) throw std::invalid_argument("ParticleMeasure: mixed dimensions");
    double s = 0.0;
    for (double m : masses) {
      if (!(m > 0.0)) throw std::invalid_argument("ParticleMeasure: masses must be positive");
      s += m;
    }
    if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("ParticleMeasure: masses must sum to 1");
  }

  static ParticleMeasure create(std::vector<Vec> positions, std::vector<double> masses) {
    ParticleMeasure mu{std::move(positions), std::move(masses)};
    mu.validate();
    return mu;
  }

  // renormalises masses whose sum is within `slack` of one
  static ParticleMeasure normalized(std::vector<Vec> positions, std::vector<double> masses,
                                    double slack = 1e-9) {
    double s = 0.0;
    for (double m : masses) s += m;
    if (std::abs(s - 1.0) > slack)
      throw std::invalid_argument("ParticleMeasure: masses do not normalise within tolerance");
    for (double& m : masses) m /= s;
    return create(std::move(positions), std::move(masses));
  }

  bool uniform_masses(double tol = 1e-12) const {
    const double w = 1.0 / size();
    for (double m : masses)
      if (std::abs(m - w) > tol) return false;
    return true;
  }
};

inline ParticleMeasure dirac(const Vec& p) { return ParticleMeasure::create({p}, {1.0}); }

inline Vec center_of_mass(const ParticleMeasure& mu) {
  Vec c = Vec::zero(mu.dim());
  for (int i = 0; i < mu.size(); ++i) c += mu.masses[i] * mu.positions[i];
  return c;
}

// Atoms within merge_tol of each other (single-linkage closure) are replaced
// by their mass-weighted barycenter. Total mass is conserved exactly.
inline ParticleMeasure merge_close(const ParticleMeasure& mu, double merge_tol) {
  if (merge_tol < 0.0) throw std::invalid_argument("merge_close: tolerance must be >= 0");
  const int n = mu.size();
  std::vector<int> root(n);
  std::iota(root.begin(), root.end(), 0);
  const auto find = [&](int i) {
    while (root[i] != i) i = root[i] = root[root[i]];
    return i;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (dist(mu.positions[i], mu.positions[j]) <= merge_tol) {
        const int a = find(i), b = find(j);
        if (a != b) root[std::max(a, b)] = std::min(a, b);
      }
  std::vector<int> cluster_of(n, -1);
  std::vector<double> mass;
  std::vector<Vec> bary;
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    if (cluster_of[r] < 0) {
      cluster_of[r] = static_cast<int>(mass.size());
      mass.push_back(0.0);
      bary.push_back(Vec::zero(mu.dim()));
    }
    const int c = cluster_of[r];
    mass[c] += mu.masses[i];
    bary[c] += mu.masses[i] * mu.positions[i];
  }
  for (std::size_t c = 0; c < mass.size(); ++c) bary[c] *= 1.0 / mass[c];
  return ParticleMeasure{std::move(bary), std::move(mass)};
}

// Transport plan between two atomic measures, stored sparsely.
struct Coupling {
  struct Entry {
    int i, j;
    double w;
  };
  ParticleMeasure source, target;
  std::vector<Entry> entries;

  void validate(double tol = 1e-10) const {
    std::vector<double> row(source.size(), 0.0), col(target.size(), 0.0);
    for (const Entry& e : entries) {
      if (e.i < 0 || e.i >= source.size() || e.j < 0 || e.j >= target.size())
        throw std::invalid_argument("Coupling: entry index out of range");
      if (!(e.w > 0.0)) throw std::invalid_argument("Coupling: weights must be positive");
      row[e.i] += e.w;
      col[e.j] += e.w;
    }
    for (int i = 0; i < source.size(); ++i)
      if (std::abs(row[i] - source.masses[i]) > tol)
        throw std::invalid_argument("Coupling: row sums do not match source masses");
    for (int j = 0; j < target.size(); ++j)
      if (std::abs(col[j] - target.masses[j]) > tol)
        throw std::invalid_argument("Coupling: column sums do not match target masses");
  }

  static Coupling create(ParticleMeasure source, ParticleMeasure target, std::vector<Entry> entries) {
    Coupling g{std::move(source), std::move(target), std::move(entries)};
    g.validate();
    return g;
  }
};

inline Coupling identity_coupling(const ParticleMeasure& mu) {
  std::vector<Coupling::Entry> e;
  for (int i = 0; i < mu.size(); ++i) e.push_back({i, i, mu.masses[i]});
  return Coupling::create(mu, mu, std::move(e));
}

inline Coupling product_coupling(const ParticleMeasure& mu, const ParticleMeasure& nu) {
  std::vector<Coupling::Entry> e;
  for (int i = 0; i < mu.size(); ++i)
    for (int j = 0; j < nu.size(); ++j) e.push_back({i, j, mu.masses[i] * nu.masses[j]});
  return Coupling::create(mu, nu, std::move(e));
}

// C(mu, nu; gamma) = sqrt( sum gamma_ij |x_i - y_j|^2 )
inline double transport_cost(const Coupling& gamma) {
  double c2 = 0.0;
  for (const Coupling::Entry& e : gamma.entries)
    c2 += e.w * norm_sq(gamma.source.positions[e.i] - gamma.target.positions[e.j]);
  return std::sqrt(c2);
}

// Pushforward of gamma under (1-t) pi^1 + t pi^2; exactly coincident atoms
// are merged so that the endpoints reproduce the marginals.
inline ParticleMeasure interpolate(const Coupling& gamma, double t) {
  if (t < 0.0 || t > 1.0) throw std::invalid_argument("interpolate: t must lie in [0,1]");
  std::vector<Vec> pos;
  std::vector<double> mass;
  for (const Coupling::Entry& e : gamma.entries) {
    const Vec p = (1.0 - t) * gamma.source.positions[e.i] + t * gamma.target.positions[e.j];
    bool merged = false;
    for (std::size_t k = 0; k < pos.size(); ++k)
      if (exactly_equal(pos[k], p)) {
        mass[k] += e.w;
        merged = true;
        break;
      }
    if (!merged) {
      pos.push_back(p);
      mass.push_back(e.w);
    }
  }
  return ParticleMeasure{std::move(pos), std::move(mass)};
}

}  // namespace aggflow
