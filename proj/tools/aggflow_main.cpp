// aggflow command-line front end: reads a JSON scenario config, dispatches to
// the library, writes summary JSON / trajectory CSV artifacts.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aggflow/aggflow.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir = ".";
  int jobs = 1;
  std::optional<std::uint64_t> seed;
};

std::string artifact_path(const CliOptions& opt, const std::string& name, int sweep_index) {
  fs::path p = fs::path(opt.out_dir);
  if (sweep_index < 0) return (p / name).string();
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d_", sweep_index);
  return (p / (buf + name)).string();
}

void write_summary(const CliOptions& opt, const aggflow::ScenarioConfig& cfg,
                   const std::string& command, int sweep_index,
                   const std::function<void(aggflow::JsonWriter&)>& results) {
  aggflow::JsonWriter w;
  w.begin_object();
  w.kv("command", command);
  w.key("config");
  w.tree(cfg.resolved);
  w.key("results");
  w.begin_object();
  results(w);
  w.end_object();
  w.end_object();
  const std::string path = artifact_path(opt, cfg.summary_json, sweep_index);
  aggflow::write_text_file(path, w.str() + "\n");
  static std::mutex io_mutex;
  std::lock_guard<std::mutex> lock(io_mutex);
  std::cout << w.str() << "\n";
}

const aggflow::ParticleMeasure& need_measure(const aggflow::ScenarioConfig& cfg) {
  if (!cfg.measure) throw std::invalid_argument("config: this command needs a \"measure\"");
  return *cfg.measure;
}

void write_trajectory_diag(aggflow::JsonWriter& w, const aggflow::Trajectory& traj) {
  w.kv("final_time", traj.times.back());
  w.kv_int("frames", static_cast<std::int64_t>(traj.times.size()));
  w.kv_int("final_atoms", traj.states.back().size());
  w.kv("final_energy", traj.diags.back().energy);
  w.kv("final_slope", traj.diags.back().slope);
  w.kv("energy_identity_residual", aggflow::energy_identity_residual(traj));
  w.kv("early_stopped", traj.early_stopped);
  w.key("merges");
  w.begin_array();
  for (const aggflow::MergeEvent& e : traj.merges) {
    w.begin_object();
    w.kv_int("step", e.step);
    w.kv("time", e.time);
    w.kv_int("atoms_before", e.atoms_before);
    w.kv_int("atoms_after", e.atoms_after);
    w.end_object();
  }
  w.end_array();
}

void run_one(const std::string& command, const CliOptions& opt, const json& raw, int sweep_index) {
  const aggflow::ScenarioConfig cfg = aggflow::parse_config(raw, opt.seed);

  if (command == "energy") {
    const auto& mu = need_measure(cfg);
    const double e = aggflow::interaction_energy(cfg.potential, mu);
    write_summary(opt, cfg, command, sweep_index, [&](aggflow::JsonWriter& w) {
      w.kv("energy", e);
      if (cfg.potential.has_difference_form() && cfg.moreau_n > 2.0 * cfg.potential.moreau_threshold())
        w.kv("energy_moreau", aggflow::interaction_energy_moreau(cfg.potential, mu, cfg.moreau_n));
    });
    return;
  }

  if (command == "selection") {
    const auto& mu = need_measure(cfg);
    const aggflow::SelectionSolution sol =
        aggflow::minimal_selection(cfg.potential, mu, cfg.qp_tol, cfg.max_iter);
    write_summary(opt, cfg, command, sweep_index, [&](aggflow::JsonWriter& w) {
      w.kv("objective", sol.objective);
      w.kv("slope", std::sqrt(std::max(0.0, sol.objective)));
      w.kv("pg_norm", sol.pg_norm);
      w.kv_int("iterations", sol.iterations);
      w.kv("converged", sol.converged);
      w.key("free_pairs");
      w.begin_array();
      for (int p : sol.selection.free_pair_indices()) {
        const auto& pr = sol.selection.pairs[p];
        w.begin_object();
        w.kv_int("i", pr.i);
        w.kv_int("j", pr.j);
        w.key("difference");
        w.vec(pr.diff);
        w.key("value");
        w.vec(pr.value);
        w.key("set");
        w.begin_object();
        w.kv("kind", pr.set.kind() == aggflow::ConvexSet::Kind::kSingleton  ? "singleton"
                     : pr.set.kind() == aggflow::ConvexSet::Kind::kSegment ? "segment"
                                                                           : "polygon");
        w.key("points");
        w.begin_array();
        for (const aggflow::Vec& v : pr.set.vertices()) w.vec(v);
        w.end_array();
        w.end_object();
        w.end_object();
      }
      w.end_array();
      w.key("velocities");
      w.begin_array();
      for (const aggflow::Vec& v : sol.velocities) w.vec(v);
      w.end_array();
    });
    if (!sol.converged) throw aggflow::SolverError("selection QP did not converge");
    return;
  }

  if (command == "simulate") {
    const auto& mu = need_measure(cfg);
    const aggflow::Trajectory traj =
        aggflow::simulate(cfg.potential, mu, cfg.dt, cfg.t_end, cfg.merge_tol);
    aggflow::write_text_file(artifact_path(opt, cfg.trajectory_csv, sweep_index),
                             aggflow::trajectory_to_csv(traj, cfg.save_stride));
    write_summary(opt, cfg, command, sweep_index,
                  [&](aggflow::JsonWriter& w) { write_trajectory_diag(w, traj); });
    return;
  }

  if (command == "jko") {
    const auto& mu = need_measure(cfg);
    const double g0 = aggflow::jko_objective(cfg.potential, mu, cfg.tau, mu);
    const aggflow::ParticleMeasure out =
        aggflow::jko_step(cfg.potential, mu, cfg.tau, cfg.inner_tol);
    const double g1 = aggflow::jko_objective(cfg.potential, mu, cfg.tau, out);
    aggflow::write_text_file(artifact_path(opt, "jko_measure.json", sweep_index),
                             aggflow::measure_to_json(out) + "\n");
    write_summary(opt, cfg, command, sweep_index, [&](aggflow::JsonWriter& w) {
      w.kv("objective_initial", g0);
      w.kv("objective_final", g1);
      w.kv("energy_final", aggflow::interaction_energy(cfg.potential, out));
      w.key("measure");
      aggflow::write_measure(w, out);
    });
    return;
  }

  if (command == "stationary") {
    const auto& mu = need_measure(cfg);
    const aggflow::CertifyReport rep =
        aggflow::certify_stationary(cfg.potential, mu, cfg.stationary_tol);
    write_summary(opt, cfg, command, sweep_index, [&](aggflow::JsonWriter& w) {
      w.kv("residual", rep.residual);
      w.kv("ok", rep.ok);
      w.kv("tol", cfg.stationary_tol);
    });
    return;
  }

  if (command == "circle-radius") {
    const double r0 = aggflow::circle_radius();
    write_summary(opt, cfg, command, sweep_index, [&](aggflow::JsonWriter& w) {
      w.kv("R0", r0);
      w.key("bracket");
      w.begin_array();
      w.value(0.5);
      w.value(std::sqrt(0.5));
      w.end_array();
      w.key("f_at_bracket");
      w.begin_array();
      w.value(aggflow::circle_f(0.5));
      w.value(aggflow::circle_f(std::sqrt(0.5)));
      w.end_array();
      w.key("residuals");
      w.begin_array();
      for (int n : {16, 64, 256}) {
        if (n > cfg.n_atoms) break;
        const aggflow::CircleReport rep = aggflow::circle_report(n);
        w.begin_object();
        w.kv_int("n_atoms", rep.n_atoms);
        w.kv("residual", rep.residual);
        w.kv("max_tangential", rep.max_tangential);
        w.end_object();
      }
      w.end_array();
    });
    return;
  }

  if (command == "pyramid") {
    const aggflow::PyramidReport rep = aggflow::pyramid_counterexample(cfg.theta, cfg.epsilon);
    write_summary(opt, cfg, command, sweep_index, [&](aggflow::JsonWriter& w) {
      w.kv("theta", rep.theta);
      w.kv("epsilon", rep.epsilon);
      w.key("eta_opt");
      w.vec(rep.eta_opt);
      w.key("min_norm_point");
      w.vec(rep.min_norm_point);
      w.kv("reduced_at_eta10", rep.reduced_at_eta10);
      w.kv("reduced_at_min_norm", rep.reduced_at_min_norm);
      w.kv("objective_opt", rep.objective_opt);
      w.kv("objective_min_norm", rep.objective_min_norm);
      w.kv("slope_opt", rep.slope_opt);
      w.kv("slope_min_norm", rep.slope_min_norm);
      w.kv("eta10_strictly_below", rep.eta10_strictly_below);
      w.kv("converged", rep.converged);
    });
    if (!rep.converged) throw aggflow::SolverError("pyramid selection QP did not converge");
    return;
  }

  if (command == "collapse") {
    const auto& mu = need_measure(cfg);
    const aggflow::CollapseReport rep = aggflow::collapse_experiment(
        cfg.potential, mu, cfg.dt, cfg.radius_tol, cfg.t_budget, cfg.merge_tol);
    std::string csv = "t,radius\n";
    for (const auto& [t, r] : rep.radius_curve)
      csv += aggflow::format_double(t) + "," + aggflow::format_double(r) + "\n";
    aggflow::write_text_file(artifact_path(opt, "radius_curve.csv", sweep_index), csv);
    write_summary(opt, cfg, command, sweep_index, [&](aggflow::JsonWriter& w) {
      w.key("collapse_time");
      if (rep.collapse_time)
        w.value(*rep.collapse_time);
      else
        w.null();
      w.kv("final_radius", rep.radius_curve.back().second);
      w.kv("max_radius_increase", rep.max_radius_increase);
      w.kv("max_speed", rep.max_speed);
      w.kv("omega", rep.omega);
    });
    return;
  }

  if (command == "contraction") {
    const auto& mu = need_measure(cfg);
    if (!cfg.measure_b) throw std::invalid_argument("config: contraction needs \"measure_b\"");
    const aggflow::Trajectory a =
        aggflow::simulate(cfg.potential, mu, cfg.dt, cfg.t_end, cfg.merge_tol);
    const aggflow::Trajectory b =
        aggflow::simulate(cfg.potential, *cfg.measure_b, cfg.dt, cfg.t_end, cfg.merge_tol);
    const double worst = aggflow::contraction_violation(cfg.potential, a, b);
    aggflow::write_text_file(artifact_path(opt, cfg.trajectory_csv, sweep_index),
                             aggflow::trajectory_to_csv(a, cfg.save_stride));
    aggflow::write_text_file(artifact_path(opt, cfg.trajectory_b_csv, sweep_index),
                             aggflow::trajectory_to_csv(b, cfg.save_stride));
    write_summary(opt, cfg, command, sweep_index, [&](aggflow::JsonWriter& w) {
      w.kv("worst_violation", worst);
      w.kv("lambda", cfg.potential.geodesic_lambda());
      w.kv("d0", aggflow::wasserstein(a.states.front(), b.states.front()).first);
    });
    return;
  }

  throw std::invalid_argument("unknown command: " + command);
}

int run_command(const std::string& command, const CliOptions& opt) {
  json raw;
  try {
    raw = json::parse(aggflow::read_text_file(opt.config_path));
  } catch (const std::exception& e) {
    std::cerr << "aggflow: config error: " << e.what() << "\n";
    return 1;
  }

  std::vector<json> items;
  if (raw.contains("sweep")) {
    json base = raw;
    base.erase("sweep");
    for (const json& patch : raw.at("sweep")) {
      json merged = base;
      merged.merge_patch(patch);
      items.push_back(std::move(merged));
    }
  } else {
    items.push_back(raw);
  }

  fs::create_directories(opt.out_dir);

  std::vector<int> codes(items.size(), 0);
  const auto worker = [&](std::size_t k) {
    try {
      run_one(command, opt, items[k], items.size() == 1 ? -1 : static_cast<int>(k));
    } catch (const aggflow::SolverError& e) {
      std::cerr << "aggflow: solver failure: " << e.what() << "\n";
      codes[k] = 2;
    } catch (const std::exception& e) {
      std::cerr << "aggflow: error: " << e.what() << "\n";
      codes[k] = 1;
    }
  };

  if (opt.jobs <= 1 || items.size() == 1) {
    for (std::size_t k = 0; k < items.size(); ++k) worker(k);
  } else {
    std::vector<std::thread> pool;
    std::size_t next = 0;
    std::mutex m;
    for (int t = 0; t < opt.jobs; ++t)
      pool.emplace_back([&] {
        while (true) {
          std::size_t k;
          {
            std::lock_guard<std::mutex> lock(m);
            if (next >= items.size()) return;
            k = next++;
          }
          worker(k);
        }
      });
    for (std::thread& t : pool) t.join();
  }

  int rc = 0;
  for (int c : codes) rc = std::max(rc, c);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"particle gradient flows for nonlocal interaction energies"};
  app.require_subcommand(1);

  CliOptions opt;
  std::uint64_t seed_value = 0;
  const std::vector<std::string> commands = {"energy",        "selection", "simulate",
                                             "jko",           "stationary", "circle-radius",
                                             "pyramid",       "collapse",   "contraction"};
  std::vector<CLI::App*> subs;
  for (const std::string& name : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config_path, "scenario config JSON")->required();
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_option("--jobs", opt.jobs, "parallel jobs for sweeps");
    CLI::Option* s = sub->add_option("--seed", seed_value, "seed override");
    sub->callback([&opt, s, &seed_value] {
      if (s->count() > 0) opt.seed = seed_value;
    });
    subs.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  for (std::size_t k = 0; k < subs.size(); ++k)
    if (subs[k]->parsed()) return run_command(commands[k], opt);
  return 1;
}
