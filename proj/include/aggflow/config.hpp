#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "aggflow/io.hpp"
#include "aggflow/potential.hpp"
#include "aggflow/rng.hpp"
#include "aggflow/scenarios.hpp"

namespace aggflow {

// Scenario description shared by all CLI commands. Parsed from JSON, checked,
// defaults filled in; `resolved` holds the full effective configuration that
// gets embedded into every summary.
struct ScenarioConfig {
  Potential potential = double_well_lip();
  std::optional<ParticleMeasure> measure;
  std::optional<ParticleMeasure> measure_b;

  double dt = 1e-3;
  double t_end = 1.0;
  double tau = 0.05;
  double merge_tol = kMergeTol;
  double kink_tol = kKinkTol;
  double qp_tol = kQpTol;
  int max_iter = kQpMaxIter;
  double inner_tol = 1e-10;
  double radius_tol = 1e-3;
  double t_budget = 10.0;
  double moreau_n = 100.0;
  int save_stride = 1;
  int n_atoms = 64;
  double theta = 3.0;
  double epsilon = 0.01;
  double stationary_tol = 1e-10;
  std::uint64_t seed = 0;

  std::string trajectory_csv = "trajectory.csv";
  std::string trajectory_b_csv = "trajectory_b.csv";
  std::string summary_json = "summary.json";

  nlohmann::json resolved;
};

namespace detail {

inline void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be > 0");
}

inline Potential potential_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw std::invalid_argument("config: potential needs a \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  Potential pot = [&]() {
    if (kind == "power_law")
      return power_law(j.value("alpha", 2.0), j.value("dimension", 1));
    if (kind == "double_well_lip") return double_well_lip();
    if (kind == "double_well_smooth") return double_well_smooth();
    if (kind == "double_well_lip_radial") return double_well_lip_radial();
    if (kind == "pyramid2d") return pyramid2d(j.value("theta", 3.0));
    if (kind == "piecewise_linear_radial")
      return piecewise_linear_radial(j.at("breaks").get<std::vector<double>>(),
                                     j.at("slopes").get<std::vector<double>>(),
                                     j.value("dimension", 1));
    throw std::invalid_argument("config: unknown potential kind \"" + kind + "\"");
  }();
  if (j.contains("lambda")) pot = pot.with_lambda(j.at("lambda").get<double>());
  return pot;
}

inline nlohmann::json resolved_potential_json(const nlohmann::json& j, const Potential& pot) {
  nlohmann::json r = j;
  r["kind"] = j.at("kind");
  r["lambda"] = pot.lambda();
  r["dimension"] = pot.dimension();
  return r;
}

inline ParticleMeasure measure_from_spec(const nlohmann::json& j, std::uint64_t seed) {
  if (j.contains("file")) {
    const std::string path = j.at("file").get<std::string>();
    const std::string text = read_text_file(path);
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") return measure_from_csv(text);
    return measure_from_json(nlohmann::json::parse(text));
  }
  if (j.contains("three_particle_alpha"))
    return three_particle_family(j.at("three_particle_alpha").get<double>());
  if (j.contains("random_uniform_box")) {
    const nlohmann::json& b = j.at("random_uniform_box");
    const int count = b.at("count").get<int>();
    if (count < 1) throw std::invalid_argument("config: random_uniform_box count must be >= 1");
    const std::vector<double> lo = b.at("low").get<std::vector<double>>();
    const std::vector<double> hi = b.at("high").get<std::vector<double>>();
    if (lo.size() != hi.size() || lo.empty() || lo.size() > 3)
      throw std::invalid_argument("config: random_uniform_box bounds must share dimension 1..3");
    Rng rng(seed);
    std::vector<Vec> pos;
    for (int i = 0; i < count; ++i) {
      Vec p(static_cast<int>(lo.size()));
      for (std::size_t k = 0; k < lo.size(); ++k) p[static_cast<int>(k)] = rng.uniform(lo[k], hi[k]);
      pos.push_back(p);
    }
    return ParticleMeasure::create(std::move(pos), std::vector<double>(count, 1.0 / count));
  }
  return measure_from_json(j);
}

}  // namespace detail

inline ScenarioConfig parse_config(const nlohmann::json& j,
                                   std::optional<std::uint64_t> seed_override = std::nullopt) {
  if (!j.is_object()) throw std::invalid_argument("config: top level must be a JSON object");
  ScenarioConfig c;
  c.seed = seed_override ? *seed_override : j.value("seed", std::uint64_t{0});

  if (j.contains("potential")) c.potential = detail::potential_from_json(j.at("potential"));
  if (j.contains("measure")) c.measure = detail::measure_from_spec(j.at("measure"), c.seed);
  if (j.contains("measure_b")) c.measure_b = detail::measure_from_spec(j.at("measure_b"), c.seed + 1);

  c.dt = j.value("dt", c.dt);
  c.t_end = j.value("t_end", c.t_end);
  c.tau = j.value("tau", c.tau);
  c.merge_tol = j.value("merge_tol", c.merge_tol);
  c.kink_tol = j.value("kink_tol", c.kink_tol);
  c.qp_tol = j.value("qp_tol", c.qp_tol);
  c.max_iter = j.value("max_iter", c.max_iter);
  c.inner_tol = j.value("inner_tol", c.inner_tol);
  c.radius_tol = j.value("radius_tol", c.radius_tol);
  c.t_budget = j.value("t_budget", c.t_budget);
  c.moreau_n = j.value("moreau_n", c.moreau_n);
  c.save_stride = j.value("save_stride", c.save_stride);
  c.n_atoms = j.value("n_atoms", c.n_atoms);
  c.theta = j.value("theta", c.theta);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.stationary_tol = j.value("stationary_tol", c.stationary_tol);
  c.trajectory_csv = j.value("trajectory_csv", c.trajectory_csv);
  c.trajectory_b_csv = j.value("trajectory_b_csv", c.trajectory_b_csv);
  c.summary_json = j.value("summary_json", c.summary_json);

  detail::require_positive(c.dt, "dt");
  detail::require_positive(c.t_end, "t_end");
  detail::require_positive(c.tau, "tau");
  detail::require_positive(c.kink_tol, "kink_tol");
  detail::require_positive(c.qp_tol, "qp_tol");
  detail::require_positive(c.inner_tol, "inner_tol");
  detail::require_positive(c.stationary_tol, "stationary_tol");
  if (c.merge_tol < 0.0) throw std::invalid_argument("merge_tol must be >= 0");
  if (c.radius_tol < 0.0) throw std::invalid_argument("radius_tol must be >= 0");
  if (c.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
  if (c.save_stride < 1) throw std::invalid_argument("save_stride must be >= 1");
  if (c.n_atoms < 8) throw std::invalid_argument("n_atoms must be >= 8");

  nlohmann::json r;
  r["seed"] = c.seed;
  if (j.contains("potential"))
    r["potential"] = detail::resolved_potential_json(j.at("potential"), c.potential);
  if (j.contains("measure")) r["measure"] = j.at("measure");
  if (j.contains("measure_b")) r["measure_b"] = j.at("measure_b");
  r["dt"] = c.dt;
  r["t_end"] = c.t_end;
  r["tau"] = c.tau;
  r["merge_tol"] = c.merge_tol;
  r["kink_tol"] = c.kink_tol;
  r["qp_tol"] = c.qp_tol;
  r["max_iter"] = c.max_iter;
  r["inner_tol"] = c.inner_tol;
  r["radius_tol"] = c.radius_tol;
  r["t_budget"] = c.t_budget;
  r["moreau_n"] = c.moreau_n;
  r["save_stride"] = c.save_stride;
  r["n_atoms"] = c.n_atoms;
  r["theta"] = c.theta;
  r["epsilon"] = c.epsilon;
  r["stationary_tol"] = c.stationary_tol;
  r["trajectory_csv"] = c.trajectory_csv;
  r["trajectory_b_csv"] = c.trajectory_b_csv;
  r["summary_json"] = c.summary_json;
  c.resolved = std::move(r);
  return c;
}

}  // namespace aggflow
