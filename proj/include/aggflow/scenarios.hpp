#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "aggflow/dynamics.hpp"
#include "aggflow/selection.hpp"

namespace aggflow {

// Family of three-atom stationary states of the Lipschitz double well:
// masses (1/4 - a, 1/2, 1/4 + a) at (-1, 0, (1-4a)/(1+4a)), 0 < a < 1/4.
inline ParticleMeasure three_particle_family(double alpha) {
  if (!(alpha > 0.0 && alpha < 0.25))
    throw std::invalid_argument("three_particle_family: alpha must lie in (0, 1/4)");
  const double x3 = (1.0 - 4.0 * alpha) / (1.0 + 4.0 * alpha);
  return ParticleMeasure::create({Vec{-1.0}, Vec{0.0}, Vec{x3}},
                                 {0.25 - alpha, 0.5, 0.25 + alpha});
}

// The parabola-vertex condition locating the optimal kink value at the
// interval endpoint; equals exactly 1 on the family above.
inline double three_particle_vertex_value(double alpha) {
  const ParticleMeasure mu = three_particle_family(alpha);
  const double m1 = mu.masses[0], m2 = mu.masses[1], m3 = mu.masses[2];
  const double x1 = mu.positions[0][0], x2 = mu.positions[1][0], x3 = mu.positions[2][0];
  return (m3 * (x3 - x2) + m3 * (x3 - x1)) / (m1 + m2);
}

struct CertifyReport {
  double residual;
  bool ok;
};

// A state is stationary when the minimal-selection velocity field vanishes.
inline CertifyReport certify_stationary(const Potential& pot, const ParticleMeasure& mu, double tol) {
  const double r = metric_slope(pot, mu);
  return {r, r <= tol};
}

// ---- uniform measure on a circle under the planar double well ----

// Root function pi - 2 alpha(R) + 2 sin alpha(R), where alpha(R) is the polar
// angle at which the unit circle around a point of radius R crosses the
// support circle: cos alpha = 1 - 1/(2 R^2).
inline double circle_f(double R) {
  const double c = std::clamp(1.0 - 1.0 / (2.0 * R * R), -1.0, 1.0);
  const double a = std::acos(c);
  return std::numbers::pi - 2.0 * a + 2.0 * std::sin(a);
}

// Unique zero of circle_f in (1/2, sqrt(2)/2), by bisection.
inline double circle_radius() {
  const double lo0 = 0.5, hi0 = std::sqrt(0.5);
  if (std::abs(circle_f(lo0) + std::numbers::pi) > 1e-12)
    throw std::logic_error("circle_radius: bracket check f(1/2) = -pi failed");
  if (std::abs(circle_f(hi0) - 2.0) > 1e-12)
    throw std::logic_error("circle_radius: bracket check f(sqrt(2)/2) = 2 failed");
  double lo = lo0, hi = hi0;
  while (hi - lo > 1e-15) {
    const double mid = 0.5 * (lo + hi);
    if (circle_f(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct CircleReport {
  int n_atoms;
  double radius;
  double residual;        // metric slope of the discretised circle
  double max_tangential;  // largest tangential velocity component
};

// Discretises the stationary circle with n equally spaced equal-mass atoms
// and measures how far the discrete velocity field is from vanishing.
inline CircleReport circle_report(int n_atoms) {
  if (n_atoms < 8) throw std::invalid_argument("circle_report: need at least 8 atoms");
  const double R = circle_radius();
  const Potential pot = double_well_lip_radial();
  std::vector<Vec> pos;
  std::vector<double> mass(n_atoms, 1.0 / n_atoms);
  pos.reserve(n_atoms);
  for (int k = 0; k < n_atoms; ++k) {
    const double a = 2.0 * std::numbers::pi * k / n_atoms;
    pos.push_back(Vec{R * std::cos(a), R * std::sin(a)});
  }
  const ParticleMeasure mu = ParticleMeasure::create(std::move(pos), std::move(mass));
  const SelectionSolution sol = minimal_selection(pot, mu, 1e-13, 3 * kQpMaxIter);
  if (!sol.converged) throw SolverError("circle_report: selection QP did not converge");
  double tang = 0.0;
  for (int k = 0; k < n_atoms; ++k) {
    const double a = 2.0 * std::numbers::pi * k / n_atoms;
    const Vec t{-std::sin(a), std::cos(a)};
    tang = std::max(tang, std::abs(dot(sol.velocities[k], t)));
  }
  return {n_atoms, R, std::sqrt(std::max(0.0, sol.objective)), tang};
}

inline double circle_residual(int n_atoms) { return circle_report(n_atoms).residual; }

// ---- pyramid counterexample ----

struct PyramidReport {
  double theta, epsilon;
  Vec eta_opt;                     // optimal kink value at the difference (1,1)
  Vec min_norm_point;              // minimal-norm element of the constraint set
  double reduced_at_eta10;         // |e|^2 + <e,(1,theta)> at e = (1,0)
  double reduced_at_min_norm;      // same at the minimal-norm element
  double objective_opt;            // full QP objective at the optimum
  double objective_min_norm;       // full QP objective with the kink forced to min-norm
  double slope_opt, slope_min_norm;
  bool eta10_strictly_below;       // objective((1,0)) < objective(min-norm)
  bool converged;
};

// Three equal atoms with differences (1,1), (-1/2-eps, 1/2), (1/2-eps, 3/2):
// the minimal velocity field does not come from the pointwise minimal
// subgradient; the optimiser leaves (1/2,1/2) for a boundary point of K.
inline PyramidReport pyramid_counterexample(double theta = 3.0, double epsilon = 0.01) {
  if (!(theta > 2.0)) throw std::invalid_argument("pyramid_counterexample: theta must be > 2");
  if (!(epsilon > 0.0 && epsilon <= 0.05))
    throw std::invalid_argument("pyramid_counterexample: epsilon must lie in (0, 0.05]");
  const Potential pot = pyramid2d(theta);
  const ParticleMeasure mu = ParticleMeasure::create(
      {Vec{0.0, 0.0}, Vec{1.0, 1.0}, Vec{0.5 - epsilon, 1.5}}, {1.0 / 3, 1.0 / 3, 1.0 / 3});

  SelectionSolution sol = minimal_selection(pot, mu, 1e-12, 3 * kQpMaxIter);
  if (sol.selection.vars.size() != 1)
    throw std::logic_error("pyramid_counterexample: expected exactly one kink pair");

  PyramidReport rep;
  rep.theta = theta;
  rep.epsilon = epsilon;
  rep.converged = sol.converged;
  rep.eta_opt = sol.selection.value_for(1, 0);  // eta(x2 - x1), indices 0-based
  rep.min_norm_point = pot.subdiff(Vec{1.0, 1.0}).min_norm();
  const Vec dir{1.0, theta};
  const auto reduced = [&](const Vec& e) { return norm_sq(e) + dot(e, dir); };
  rep.reduced_at_eta10 = reduced(Vec{1.0, 0.0});
  rep.reduced_at_min_norm = reduced(rep.min_norm_point);
  rep.objective_opt = sol.objective;
  rep.slope_opt = std::sqrt(std::max(0.0, sol.objective));

  // force the kink value to the pointwise minimal subgradient and re-evaluate
  PairSelection forced = sol.selection;
  const double sign = forced.pairs[forced.vars[0].pair_indices[0]].sign;
  // stored variable is eta at the canonical difference x1 - x2 = (-1,-1)
  forced.set_free_value(0, sign > 0 ? (-1.0) * rep.min_norm_point : rep.min_norm_point);
  rep.objective_min_norm = selection_objective(forced, mu);
  rep.slope_min_norm = std::sqrt(std::max(0.0, rep.objective_min_norm));

  PairSelection at10 = sol.selection;
  at10.set_free_value(0, sign > 0 ? Vec{-1.0, 0.0} : Vec{1.0, 0.0});
  rep.eta10_strictly_below = selection_objective(at10, mu) < rep.objective_min_norm;
  return rep;
}

}  // namespace aggflow
