#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "aggflow/selection.hpp"
#include "aggflow/transport.hpp"

namespace aggflow {

inline constexpr double kMergeTol = 1e-8;
inline constexpr double kStationarySlope = 1e-12;

// Velocity field of the flow at a state: convex radial kernels use the
// closed-form minimal selection, everything else goes through the QP. The
// tolerance is tight enough that the derived slope resolves the stationarity
// threshold used for early stopping.
inline std::vector<Vec> flow_velocities(const Potential& pot, const ParticleMeasure& mu,
                                        double qp_tol = 1e-13, int max_iter = 3 * kQpMaxIter) {
  if (pot.is_radial() && pot.is_convex()) return radial_minimal_velocity(pot, mu);
  SelectionSolution s = minimal_selection(pot, mu, qp_tol, max_iter);
  if (!s.converged)
    throw SolverError("flow_velocities: projected gradient stalled at residual " +
                      std::to_string(s.pg_norm));
  return std::move(s.velocities);
}

// One explicit Euler step followed by merging of near-coincident atoms.
inline ParticleMeasure step_euler(const Potential& pot, const ParticleMeasure& mu, double dt,
                                  double merge_tol = kMergeTol) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_euler: dt must be positive");
  const std::vector<Vec> v = flow_velocities(pot, mu);
  ParticleMeasure next = mu;
  for (int i = 0; i < next.size(); ++i) next.positions[i] += dt * v[i];
  return merge_close(next, merge_tol);
}

struct MergeEvent {
  int step;
  double time;
  int atoms_before, atoms_after;
};

struct FrameDiag {
  double energy;
  double slope;  // L^2(mu) norm of the velocity field at this frame
};

struct Trajectory {
  std::vector<double> times;
  std::vector<ParticleMeasure> states;
  std::vector<FrameDiag> diags;
  std::vector<MergeEvent> merges;
  bool early_stopped = false;
};

inline Trajectory simulate(const Potential& pot, const ParticleMeasure& mu0, double dt, double t_end,
                           double merge_tol = kMergeTol) {
  if (!(dt > 0.0) || !(t_end > 0.0)) throw std::invalid_argument("simulate: dt and t_end must be positive");
  const long long steps = std::max<long long>(1, std::llround(t_end / dt));
  Trajectory traj;
  ParticleMeasure mu = mu0;
  std::vector<Vec> v = flow_velocities(pot, mu);
  double slope = std::sqrt(detail::weighted_norm_sq(v, mu.masses));
  traj.times.push_back(0.0);
  traj.states.push_back(mu);
  traj.diags.push_back({interaction_energy(pot, mu), slope});
  for (long long k = 0; k < steps; ++k) {
    if (slope < kStationarySlope) {
      traj.early_stopped = true;
      break;
    }
    for (int i = 0; i < mu.size(); ++i) mu.positions[i] += dt * v[i];
    const int before = mu.size();
    mu = merge_close(mu, merge_tol);
    const double t = static_cast<double>(k + 1) * dt;
    if (mu.size() != before)
      traj.merges.push_back({static_cast<int>(k + 1), t, before, mu.size()});
    v = flow_velocities(pot, mu);
    slope = std::sqrt(detail::weighted_norm_sq(v, mu.masses));
    traj.times.push_back(t);
    traj.states.push_back(mu);
    traj.diags.push_back({interaction_energy(pot, mu), slope});
  }
  return traj;
}

// | int ||v||^2 dt + W(end) - W(start) |, trapezoid rule on the recorded
// frame diagnostics; first-order accurate for the Euler discretisation.
inline double energy_identity_residual(const Trajectory& traj) {
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < traj.times.size(); ++k) {
    const double dt = traj.times[k + 1] - traj.times[k];
    const double a = traj.diags[k].slope, b = traj.diags[k + 1].slope;
    acc += 0.5 * dt * (a * a + b * b);
  }
  return std::abs(acc + traj.diags.back().energy - traj.diags.front().energy);
}

// Worst value over the common grid of d_W(mu(t), nu(t)) - e^{-lambda t} d_W(mu0, nu0),
// with the non-positive modulus governing the flow.
inline double contraction_violation(const Potential& pot, const Trajectory& a, const Trajectory& b) {
  if (a.times.size() != b.times.size())
    throw std::invalid_argument("contraction_violation: incompatible time grids");
  for (std::size_t k = 0; k < a.times.size(); ++k)
    if (std::abs(a.times[k] - b.times[k]) > 1e-12)
      throw std::invalid_argument("contraction_violation: incompatible time grids");
  const double lam = pot.geodesic_lambda();
  const double d0 = wasserstein(a.states.front(), b.states.front()).first;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < a.times.size(); ++k) {
    const double d = wasserstein(a.states[k], b.states[k]).first;
    worst = std::max(worst, d - std::exp(-lam * a.times[k]) * d0);
  }
  return worst;
}

// ---- JKO / minimizing movement ----

// Penalised functional G(nu) = W(nu) + d_W^2(nu, ref) / (2 tau) with the
// candidate's atom positions free and masses pinned to ref's.
inline double jko_objective(const Potential& pot, const ParticleMeasure& ref, double tau,
                            const ParticleMeasure& candidate) {
  const double d = wasserstein(candidate, ref).first;
  return interaction_energy(pot, candidate) + d * d / (2.0 * tau);
}

// One minimizing-movement step: alternate exact re-coupling with gradient
// steps on the atom positions. The step size tau/(1 + tau L_W) uses a crude
// Lipschitz bound from the modulus and the growth constant.
inline ParticleMeasure jko_step(const Potential& pot, const ParticleMeasure& mu, double tau,
                                double inner_tol = 1e-10, int max_inner = 10000) {
  if (!(tau > 0.0) || tau * std::max(0.0, -pot.lambda()) >= 0.5)
    throw std::invalid_argument("jko_step: tau out of range");
  if (mu.dim() != 1 && !mu.uniform_masses())
    throw std::invalid_argument("jko_step: multi-d steps need uniform masses (exact transport)");
  if (mu.dim() != pot.dimension()) throw std::invalid_argument("jko_step: dimension mismatch");

  const double lip = std::max(1.0, std::abs(pot.lambda())) + 2.0 * pot.growth_constant();
  const double s = tau / (1.0 + tau * lip);
  ParticleMeasure nu = mu;
  for (int it = 0; it < max_inner; ++it) {
    const Coupling gamma = wasserstein(nu, mu).second;
    std::vector<Vec> bar(nu.size(), Vec::zero(nu.dim()));
    for (const Coupling::Entry& e : gamma.entries) bar[e.i] += e.w * mu.positions[e.j];
    for (int j = 0; j < nu.size(); ++j) bar[j] *= 1.0 / nu.masses[j];

    const std::vector<Vec> v = flow_velocities(pot, nu);
    double step2 = 0.0;
    for (int j = 0; j < nu.size(); ++j) {
      // xi_j = -v_j is the Wasserstein gradient of the energy term
      const Vec d = -1.0 * v[j] + (1.0 / tau) * (nu.positions[j] - bar[j]);
      const Vec delta = -s * d;
      nu.positions[j] += delta;
      step2 += norm_sq(delta);
    }
    if (std::sqrt(step2) < inner_tol) return nu;
  }
  throw SolverError("jko_step: inner iteration budget exhausted");
}

// ---- finite-time collapse experiment ----

struct CollapseReport {
  std::optional<double> collapse_time;
  std::vector<std::pair<double, double>> radius_curve;  // (t, R(t))
  double max_radius_increase = 0.0;
  double max_speed = 0.0;
  double omega = 0.0;  // inf of the minimal subgradient slope
};

// Simulates a convex radial kernel until the support radius around the
// (conserved) center of mass drops below radius_tol or the time budget runs
// out.
inline CollapseReport collapse_experiment(const Potential& pot, const ParticleMeasure& mu0, double dt,
                                          double radius_tol, double t_budget = 10.0,
                                          double merge_tol = kMergeTol) {
  if (!pot.is_radial() || !pot.is_convex())
    throw std::domain_error("collapse_experiment: convex radial potential required");
  if (!mu0.uniform_masses())
    throw std::invalid_argument("collapse_experiment: uniform masses required");
  if (!(dt > 0.0)) throw std::invalid_argument("collapse_experiment: dt must be positive");

  CollapseReport rep;
  rep.omega = pot.min_slope();
  const Vec x0 = center_of_mass(mu0);
  const auto radius = [&](const ParticleMeasure& m) {
    double r = 0.0;
    for (const Vec& p : m.positions) r = std::max(r, dist(p, x0));
    return r;
  };

  ParticleMeasure mu = mu0;
  double t = 0.0;
  double r_prev = radius(mu);
  rep.radius_curve.push_back({t, r_prev});
  while (true) {
    if (r_prev < radius_tol) {
      rep.collapse_time = t;
      break;
    }
    if (t >= t_budget) break;
    const std::vector<Vec> v = radial_minimal_velocity(pot, mu);
    for (const Vec& vi : v) rep.max_speed = std::max(rep.max_speed, norm(vi));
    for (int i = 0; i < mu.size(); ++i) mu.positions[i] += dt * v[i];
    mu = merge_close(mu, merge_tol);
    t += dt;
    const double r = radius(mu);
    rep.max_radius_increase = std::max(rep.max_radius_increase, r - r_prev);
    rep.radius_curve.push_back({t, r});
    r_prev = r;
  }
  return rep;
}

}  // namespace aggflow
