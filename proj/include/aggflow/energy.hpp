#pragma once

#include "aggflow/measure.hpp"
#include "aggflow/potential.hpp"

namespace aggflow {

// W(mu) = (1/2) sum_ij m_i m_j W(x_i, x_j), diagonal terms included: the
// defining double integral runs over the full product.
inline double interaction_energy(const Potential& pot, const ParticleMeasure& mu) {
  if (mu.dim() != pot.dimension())
    throw std::invalid_argument("interaction_energy: dimension mismatch");
  const int n = mu.size();
  double e = 0.0;
  for (int i = 0; i < n; ++i) {
    e += 0.5 * mu.masses[i] * mu.masses[i] * pot.eval(mu.positions[i], mu.positions[i]);
    for (int j = i + 1; j < n; ++j)
      e += mu.masses[i] * mu.masses[j] * pot.eval(mu.positions[i], mu.positions[j]);
  }
  return e;
}

// Regularised energy W_n(mu) built from the joint Moreau envelope of the
// kernel on the product space; for difference kernels that envelope equals
// the difference-variable envelope at parameter n/2.
inline double interaction_energy_moreau(const Potential& pot, const ParticleMeasure& mu, double n) {
  if (mu.dim() != pot.dimension())
    throw std::invalid_argument("interaction_energy_moreau: dimension mismatch");
  const int N = mu.size();
  const double half_n = 0.5 * n;
  double e = 0.0;
  for (int i = 0; i < N; ++i) {
    e += 0.5 * mu.masses[i] * mu.masses[i] *
         pot.moreau_envelope(mu.positions[i] - mu.positions[i], half_n);
    for (int j = i + 1; j < N; ++j)
      e += mu.masses[i] * mu.masses[j] *
           pot.moreau_envelope(mu.positions[i] - mu.positions[j], half_n);
  }
  return e;
}

}  // namespace aggflow
