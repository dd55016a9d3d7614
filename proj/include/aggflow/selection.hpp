#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aggflow/energy.hpp"
#include "aggflow/measure.hpp"
#include "aggflow/potential.hpp"

namespace aggflow {

inline constexpr double kQpTol = 1e-10;
inline constexpr int kQpMaxIter = 100000;

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Antisymmetric assignment of subgradient values to ordered particle pairs.
// Only the value eta(x_i - x_j) for i < j is stored; the reverse pair reads
// its negation. Pairs whose constraint set is not a single gradient share one
// optimisation variable per distinct kink difference (eta is a function of
// the difference, so pairs with the same difference, or opposite differences
// up to sign, are tied together).
struct PairSelection {
  struct Pair {
    int i, j;        // i < j
    Vec diff;        // x_i - x_j
    Vec value;       // eta(x_i - x_j)
    ConvexSet set;   // subdifferential at diff
    int var = -1;    // index into vars, -1 when fixed
    double sign = 1.0;
    bool coincident = false;
  };
  struct FreeVar {
    Vec diff;       // canonical difference (first pair encountered)
    ConvexSet set;  // constraint set at the canonical difference
    Vec value;
    std::vector<int> pair_indices;
  };

  std::vector<Pair> pairs;
  std::vector<FreeVar> vars;
  int atoms = 0;
  int dim = 0;

  bool has_free() const { return !vars.empty(); }

  std::vector<int> free_pair_indices() const {
    std::vector<int> out;
    for (std::size_t p = 0; p < pairs.size(); ++p)
      if (pairs[p].var >= 0) out.push_back(static_cast<int>(p));
    return out;
  }

  void set_free_value(int var, const Vec& v) {
    vars[var].value = v;
    for (int p : vars[var].pair_indices) pairs[p].value = pairs[p].sign * v;
  }

  // eta(x_i - x_j) for any ordered index pair
  Vec value_for(int i, int j) const {
    for (const Pair& p : pairs) {
      if (p.i == std::min(i, j) && p.j == std::max(i, j)) return i < j ? p.value : -p.value;
    }
    throw std::invalid_argument("PairSelection::value_for: no such pair");
  }
};

inline PairSelection build_selection_problem(const Potential& pot, const ParticleMeasure& mu,
                                             double kink_tol = kKinkTol) {
  if (!pot.has_difference_form())
    throw std::domain_error("build_selection_problem: difference or radial form required");
  if (mu.dim() != pot.dimension())
    throw std::invalid_argument("build_selection_problem: dimension mismatch");
  PairSelection sel;
  sel.atoms = mu.size();
  sel.dim = mu.dim();
  for (int i = 0; i < mu.size(); ++i) {
    for (int j = i + 1; j < mu.size(); ++j) {
      const Vec z = mu.positions[i] - mu.positions[j];
      PairSelection::Pair p{i, j, z, Vec::zero(sel.dim), ConvexSet::singleton(Vec::zero(sel.dim)), -1,
                            1.0, false};
      if (norm(z) <= kink_tol) {
        p.coincident = true;  // eta(0) = 0 forced by antisymmetry
      } else {
        ConvexSet s = pot.subdiff(z, kink_tol);
        if (s.is_pointlike()) {
          p.value = s.min_norm();
          p.set = std::move(s);
        } else {
          int var = -1;
          double sign = 1.0;
          for (std::size_t k = 0; k < sel.vars.size(); ++k) {
            if (dist(z, sel.vars[k].diff) <= kink_tol) {
              var = static_cast<int>(k);
              sign = 1.0;
              break;
            }
            if (dist(z, -sel.vars[k].diff) <= kink_tol) {
              var = static_cast<int>(k);
              sign = -1.0;
              break;
            }
          }
          if (var < 0) {
            var = static_cast<int>(sel.vars.size());
            sel.vars.push_back({z, s, s.min_norm(), {}});
            sign = 1.0;
          }
          p.var = var;
          p.sign = sign;
          p.set = std::move(s);
          p.value = sign * sel.vars[var].value;
          sel.vars[var].pair_indices.push_back(static_cast<int>(sel.pairs.size()));
        }
      }
      sel.pairs.push_back(std::move(p));
    }
  }
  return sel;
}

namespace detail {

// xi(x_j) = sum_i m_i eta(x_j - x_i), the convolution of the selection with mu
inline std::vector<Vec> convolution_field(const PairSelection& sel, const std::vector<double>& masses) {
  std::vector<Vec> u(sel.atoms, Vec::zero(sel.dim));
  for (const PairSelection::Pair& p : sel.pairs) {
    u[p.i] += masses[p.j] * p.value;
    u[p.j] -= masses[p.i] * p.value;
  }
  return u;
}

inline double weighted_norm_sq(const std::vector<Vec>& u, const std::vector<double>& masses) {
  double s = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) s += masses[j] * norm_sq(u[j]);
  return s;
}

}  // namespace detail

// F(eta) = sum_j m_j | sum_i m_i eta(x_j - x_i) |^2 for the given selection
inline double selection_objective(const PairSelection& sel, const ParticleMeasure& mu) {
  return detail::weighted_norm_sq(detail::convolution_field(sel, mu.masses), mu.masses);
}

struct SelectionSolution {
  PairSelection selection;
  std::vector<Vec> velocities;  // v_j = -xi(x_j)
  double objective = 0.0;       // F at the returned selection
  double pg_norm = 0.0;         // final projected-gradient norm
  int iterations = 0;
  bool converged = true;
};

// Minimises F over antisymmetric selections with each kink value constrained
// to its subdifferential set. F is a positive-semidefinite quadratic in the
// free values, so fixed-step projected gradient with step 1/L converges; L is
// the mass-based bound 2 (sum m) (max m) N on the Hessian norm.
inline SelectionSolution minimal_selection(const Potential& pot, const ParticleMeasure& mu,
                                           double qp_tol = kQpTol, int max_iter = kQpMaxIter,
                                           const std::vector<Vec>* init_free = nullptr) {
  SelectionSolution out;
  out.selection = build_selection_problem(pot, mu);
  PairSelection& sel = out.selection;
  if (init_free != nullptr) {
    if (init_free->size() != sel.vars.size())
      throw std::invalid_argument("minimal_selection: wrong number of initial values");
    for (std::size_t k = 0; k < sel.vars.size(); ++k)
      sel.set_free_value(static_cast<int>(k), sel.vars[k].set.project((*init_free)[k]));
  }

  const std::vector<double>& m = mu.masses;
  std::vector<Vec> u = detail::convolution_field(sel, m);

  if (sel.has_free()) {
    double total = 0.0, mmax = 0.0;
    for (double mi : m) {
      total += mi;
      mmax = std::max(mmax, mi);
    }
    const double L = 2.0 * total * mmax * mu.size();
    const int nv = static_cast<int>(sel.vars.size());
    std::vector<Vec> grad(nv), next(nv);
    for (out.iterations = 0; out.iterations < max_iter; ++out.iterations) {
      for (int k = 0; k < nv; ++k) {
        Vec g = Vec::zero(sel.dim);
        for (int pi : sel.vars[k].pair_indices) {
          const PairSelection::Pair& p = sel.pairs[pi];
          g += (2.0 * p.sign * m[p.i] * m[p.j]) * (u[p.i] - u[p.j]);
        }
        grad[k] = g;
      }
      double pg2 = 0.0;
      for (int k = 0; k < nv; ++k) {
        next[k] = sel.vars[k].set.project(sel.vars[k].value - (1.0 / L) * grad[k]);
        pg2 += norm_sq(L * (sel.vars[k].value - next[k]));
      }
      out.pg_norm = std::sqrt(pg2);
      if (out.pg_norm < qp_tol) break;
      for (int k = 0; k < nv; ++k) sel.set_free_value(k, next[k]);
      u = detail::convolution_field(sel, m);
    }
    out.converged = out.pg_norm < qp_tol;
  }

  out.objective = detail::weighted_norm_sq(u, m);
  out.velocities.reserve(u.size());
  for (const Vec& uj : u) out.velocities.push_back(-uj);
  return out;
}

// Convex radial fast path: the minimal selection is the pointwise minimal
// subgradient, v_j = sum_i m_i d^o W(x_i - x_j), no optimisation needed.
inline std::vector<Vec> radial_minimal_velocity(const Potential& pot, const ParticleMeasure& mu) {
  if (!pot.is_radial()) throw std::domain_error("radial_minimal_velocity: radial form required");
  if (!pot.is_convex()) throw std::domain_error("radial_minimal_velocity: convex potential required");
  if (mu.dim() != pot.dimension())
    throw std::invalid_argument("radial_minimal_velocity: dimension mismatch");
  std::vector<Vec> v(mu.size(), Vec::zero(mu.dim()));
  for (int j = 0; j < mu.size(); ++j)
    for (int i = 0; i < mu.size(); ++i) {
      if (i == j) continue;
      v[j] += mu.masses[i] * pot.min_norm_subgrad(mu.positions[i] - mu.positions[j]);
    }
  return v;
}

// |dW|(mu), the L^2(mu) norm of the minimal subdifferential element.
inline double metric_slope(const Potential& pot, const ParticleMeasure& mu) {
  if (pot.is_radial() && pot.is_convex()) {
    const std::vector<Vec> v = radial_minimal_velocity(pot, mu);
    return std::sqrt(detail::weighted_norm_sq(v, mu.masses));
  }
  const SelectionSolution s = minimal_selection(pot, mu, 1e-13, 3 * kQpMaxIter);
  if (!s.converged)
    throw SolverError("metric_slope: projected gradient stalled at residual " + std::to_string(s.pg_norm));
  return std::sqrt(std::max(0.0, s.objective));
}

struct SubdiffCheck {
  double lhs = 0.0;  // W(nu) - W(mu)
  double rhs = 0.0;  // coupling pairing + lambda penalty
  bool ok = false;
};

// Tests the Wasserstein subdifferential inequality for the field induced by
// the selection, against an arbitrary admissible coupling.
inline SubdiffCheck check_strong_subdiff(const Potential& pot, const ParticleMeasure& mu,
                                         const PairSelection& sel, const ParticleMeasure& nu,
                                         const Coupling& gamma, double tol = 1e-9) {
  if (gamma.source.size() != mu.size() || gamma.target.size() != nu.size())
    throw std::invalid_argument("check_strong_subdiff: coupling marginals mismatch");
  for (int i = 0; i < mu.size(); ++i)
    if (dist(gamma.source.positions[i], mu.positions[i]) > 1e-12 ||
        std::abs(gamma.source.masses[i] - mu.masses[i]) > 1e-10)
      throw std::invalid_argument("check_strong_subdiff: coupling marginals mismatch");
  for (int j = 0; j < nu.size(); ++j)
    if (dist(gamma.target.positions[j], nu.positions[j]) > 1e-12 ||
        std::abs(gamma.target.masses[j] - nu.masses[j]) > 1e-10)
      throw std::invalid_argument("check_strong_subdiff: coupling marginals mismatch");

  const std::vector<Vec> xi = detail::convolution_field(sel, mu.masses);
  SubdiffCheck c;
  c.lhs = interaction_energy(pot, nu) - interaction_energy(pot, mu);
  double pairing = 0.0;
  for (const Coupling::Entry& e : gamma.entries)
    pairing += e.w * dot(xi[e.i], nu.positions[e.j] - mu.positions[e.i]);
  const double cost = transport_cost(gamma);
  c.rhs = pairing + 0.5 * pot.geodesic_lambda() * cost * cost;
  c.ok = c.lhs >= c.rhs - tol;
  return c;
}

}  // namespace aggflow
