#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "test_util.hpp"

using namespace aggflow;
using Catch::Approx;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("aggflow_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(AGGFLOW_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  f << text;
}

}  // namespace

TEST_CASE("config parsing and validation") {
  const json good = json::parse(R"({
    "potential": {"kind": "double_well_lip"},
    "measure": {"positions": [[0.0],[1.0]], "masses": [0.5, 0.5]},
    "dt": 0.01
  })");
  const ScenarioConfig cfg = parse_config(good);
  CHECK(cfg.dt == 0.01);
  CHECK(cfg.t_end == 1.0);  // default
  CHECK(cfg.potential.name() == "double_well_lip");
  REQUIRE(cfg.measure.has_value());
  CHECK(cfg.measure->size() == 2);
  CHECK(cfg.resolved.at("dt").get<double>() == 0.01);

  // masses renormalised when within 1e-9
  json near = good;
  near["measure"]["masses"] = {0.5, 0.5 + 4e-10};
  const ScenarioConfig near_cfg = parse_config(near);
  double s = 0.0;
  for (double m : near_cfg.measure->masses) s += m;
  CHECK(s == Approx(1.0).margin(1e-15));

  json bad_mass = good;
  bad_mass["measure"]["masses"] = {1.5, -0.5};
  CHECK_THROWS_AS(parse_config(bad_mass), std::invalid_argument);

  json bad_kind = good;
  bad_kind["potential"]["kind"] = "lennard_jones";
  CHECK_THROWS_AS(parse_config(bad_kind), std::invalid_argument);

  json bad_tol = good;
  bad_tol["qp_tol"] = 0.0;
  CHECK_THROWS_AS(parse_config(bad_tol), std::invalid_argument);

  // seeded random measure generation is deterministic
  const json rnd = json::parse(R"({
    "potential": {"kind": "power_law", "alpha": 1.0, "dimension": 2},
    "measure": {"random_uniform_box": {"count": 10, "low": [-1,-1], "high": [1,1]}},
    "seed": 7
  })");
  const ScenarioConfig a = parse_config(rnd);
  const ScenarioConfig b = parse_config(rnd);
  REQUIRE(a.measure->size() == 10);
  for (int i = 0; i < 10; ++i)
    CHECK(dist(a.measure->positions[i], b.measure->positions[i]) == 0.0);
  const ScenarioConfig c = parse_config(rnd, std::uint64_t{8});
  CHECK(dist(a.measure->positions[0], c.measure->positions[0]) > 0.0);
}

TEST_CASE("lambda override is honoured") {
  const json j = json::parse(R"({"potential": {"kind": "power_law", "alpha": 2.0, "lambda": -0.5}})");
  CHECK(parse_config(j).potential.lambda() == -0.5);
}

TEST_CASE("cli simulate on a stationary config") {
  TempDir tmp;
  write_file(tmp.path / "cfg.json", R"({
    "potential": {"kind": "double_well_lip"},
    "measure": {"three_particle_alpha": 0.1},
    "dt": 1e-3, "t_end": 1.0
  })");
  const int rc = run_cli("simulate --config " + (tmp.path / "cfg.json").string() + " --out " +
                         (tmp.path / "out").string());
  CHECK(rc == 0);
  const json summary = json::parse(read_text_file((tmp.path / "out" / "summary.json").string()));
  CHECK(summary.at("results").at("final_slope").get<double>() < 1e-8);
  CHECK(summary.at("results").at("early_stopped").get<bool>());
  CHECK(fs::exists(tmp.path / "out" / "trajectory.csv"));
  const std::string csv = read_text_file((tmp.path / "out" / "trajectory.csv").string());
  CHECK(csv.rfind("t,atom_id,x1,mass\n", 0) == 0);
}

TEST_CASE("cli rejects malformed configs without artifacts") {
  TempDir tmp;
  write_file(tmp.path / "bad.json", R"({
    "potential": {"kind": "double_well_lip"},
    "measure": {"positions": [[0.0],[1.0]], "masses": [1.5, -0.5]}
  })");
  const int rc = run_cli("simulate --config " + (tmp.path / "bad.json").string() + " --out " +
                         (tmp.path / "out").string());
  CHECK(rc == 1);
  CHECK_FALSE(fs::exists(tmp.path / "out" / "summary.json"));
  CHECK_FALSE(fs::exists(tmp.path / "out" / "trajectory.csv"));
}

TEST_CASE("cli circle-radius report") {
  TempDir tmp;
  write_file(tmp.path / "cfg.json", R"({"n_atoms": 16})");
  const int rc = run_cli("circle-radius --config " + (tmp.path / "cfg.json").string() + " --out " +
                         (tmp.path / "out").string());
  CHECK(rc == 0);
  const json summary = json::parse(read_text_file((tmp.path / "out" / "summary.json").string()));
  const auto& res = summary.at("results");
  CHECK(res.at("R0").get<double>() == Approx(0.54658487).margin(1e-7));
  CHECK(res.at("bracket")[0].get<double>() == 0.5);
  CHECK(res.at("bracket")[1].get<double>() == Approx(std::sqrt(0.5)).margin(1e-15));
  CHECK(res.at("f_at_bracket")[0].get<double>() == Approx(-3.14159265358979).margin(1e-12));
  CHECK(res.at("f_at_bracket")[1].get<double>() == Approx(2.0).margin(1e-12));
}

TEST_CASE("cli summaries are byte-identical across runs") {
  TempDir tmp;
  write_file(tmp.path / "cfg.json", R"({
    "potential": {"kind": "double_well_lip"},
    "measure": {"positions": [[0.0],[0.3]], "masses": [0.5, 0.5]},
    "dt": 1e-3, "t_end": 0.05
  })");
  REQUIRE(run_cli("simulate --config " + (tmp.path / "cfg.json").string() + " --out " +
                  (tmp.path / "a").string()) == 0);
  REQUIRE(run_cli("simulate --config " + (tmp.path / "cfg.json").string() + " --out " +
                  (tmp.path / "b").string()) == 0);
  CHECK(read_text_file((tmp.path / "a" / "summary.json").string()) ==
        read_text_file((tmp.path / "b" / "summary.json").string()));
  CHECK(read_text_file((tmp.path / "a" / "trajectory.csv").string()) ==
        read_text_file((tmp.path / "b" / "trajectory.csv").string()));
}

TEST_CASE("cli selection summary lists the free pair") {
  TempDir tmp;
  write_file(tmp.path / "cfg.json", R"({
    "potential": {"kind": "double_well_lip"},
    "measure": {"positions": [[1.0],[0.0],[0.75]],
                "masses": [0.33333333333333333, 0.33333333333333333, 0.33333333333333334]}
  })");
  REQUIRE(run_cli("selection --config " + (tmp.path / "cfg.json").string() + " --out " +
                  (tmp.path / "out").string()) == 0);
  const json summary = json::parse(read_text_file((tmp.path / "out" / "summary.json").string()));
  const auto& res = summary.at("results");
  REQUIRE(res.at("free_pairs").size() == 1);
  CHECK(res.at("free_pairs")[0].at("value")[0].get<double>() == Approx(0.5).margin(1e-8));
  CHECK(res.at("free_pairs")[0].at("set").at("kind").get<std::string>() == "segment");
  CHECK(res.at("converged").get<bool>());
}

TEST_CASE("cli jko, collapse, contraction and energy commands") {
  TempDir tmp;
  write_file(tmp.path / "jko.json", R"({
    "potential": {"kind": "power_law", "alpha": 2.0, "dimension": 1},
    "measure": {"positions": [[-1.0],[1.0]], "masses": [0.5, 0.5]},
    "tau": 0.05
  })");
  REQUIRE(run_cli("jko --config " + (tmp.path / "jko.json").string() + " --out " +
                  (tmp.path / "out").string()) == 0);
  json s = json::parse(read_text_file((tmp.path / "out" / "summary.json").string()));
  const auto& pos = s.at("results").at("measure").at("positions");
  CHECK(pos[1][0].get<double>() - pos[0][0].get<double>() ==
        Approx(2.0 / 1.1).margin(1e-6));
  CHECK(s.at("results").at("objective_final").get<double>() <=
        s.at("results").at("objective_initial").get<double>());
  CHECK(fs::exists(tmp.path / "out" / "jko_measure.json"));

  write_file(tmp.path / "col.json", R"({
    "potential": {"kind": "power_law", "alpha": 1.0, "dimension": 2},
    "measure": {"random_uniform_box": {"count": 10, "low": [-1,-1], "high": [1,1]}},
    "dt": 1e-3, "radius_tol": 1e-3, "t_budget": 6.0
  })");
  REQUIRE(run_cli("collapse --config " + (tmp.path / "col.json").string() + " --out " +
                  (tmp.path / "out").string()) == 0);
  s = json::parse(read_text_file((tmp.path / "out" / "summary.json").string()));
  CHECK(s.at("results").at("collapse_time").get<double>() < 6.0);
  CHECK(s.at("results").at("omega").get<double>() == 1.0);
  CHECK(fs::exists(tmp.path / "out" / "radius_curve.csv"));

  write_file(tmp.path / "con.json", R"({
    "potential": {"kind": "double_well_lip"},
    "measure":   {"positions": [[-0.6],[0.1],[0.5]],    "masses": [0.3,0.4,0.3]},
    "measure_b": {"positions": [[-0.58],[0.085],[0.51]], "masses": [0.3,0.4,0.3]},
    "dt": 1e-3, "t_end": 0.2
  })");
  REQUIRE(run_cli("contraction --config " + (tmp.path / "con.json").string() + " --out " +
                  (tmp.path / "out").string()) == 0);
  s = json::parse(read_text_file((tmp.path / "out" / "summary.json").string()));
  CHECK(s.at("results").at("worst_violation").get<double>() <= 1e-3);
  CHECK(fs::exists(tmp.path / "out" / "trajectory_b.csv"));

  write_file(tmp.path / "en.json", R"({
    "potential": {"kind": "double_well_lip"},
    "measure": {"positions": [[0.0],[1.0]], "masses": [0.5, 0.5]}
  })");
  REQUIRE(run_cli("energy --config " + (tmp.path / "en.json").string() + " --out " +
                  (tmp.path / "out").string()) == 0);
  s = json::parse(read_text_file((tmp.path / "out" / "summary.json").string()));
  CHECK(s.at("results").at("energy").get<double>() == Approx(0.125).margin(1e-15));
}

TEST_CASE("cli reports solver failure with exit code 2") {
  TempDir tmp;
  // one projected-gradient iteration cannot reach the default tolerance
  write_file(tmp.path / "cfg.json", R"({
    "potential": {"kind": "double_well_lip"},
    "measure": {"positions": [[1.0],[0.0],[0.75]],
                "masses": [0.33333333333333333, 0.33333333333333333, 0.33333333333333334]},
    "max_iter": 1
  })");
  CHECK(run_cli("selection --config " + (tmp.path / "cfg.json").string() + " --out " +
                (tmp.path / "out").string()) == 2);
}

TEST_CASE("cli loads measures from files") {
  TempDir tmp;
  write_file(tmp.path / "atoms.csv", "0.0,0.5\n1.0,0.5\n");
  write_file(tmp.path / "cfg.json", std::string(R"({
    "potential": {"kind": "double_well_lip"},
    "measure": {"file": ")") + (tmp.path / "atoms.csv").string() + R"("}
  })");
  REQUIRE(run_cli("energy --config " + (tmp.path / "cfg.json").string() + " --out " +
                  (tmp.path / "out").string()) == 0);
  const json s = json::parse(read_text_file((tmp.path / "out" / "summary.json").string()));
  CHECK(s.at("results").at("energy").get<double>() == Approx(0.125).margin(1e-15));
}

TEST_CASE("cli sweep produces indexed artifacts") {
  TempDir tmp;
  write_file(tmp.path / "cfg.json", R"({
    "potential": {"kind": "double_well_lip"},
    "measure": {"three_particle_alpha": 0.1},
    "sweep": [ {"measure": {"three_particle_alpha": 0.05}},
               {"measure": {"three_particle_alpha": 0.2}} ]
  })");
  REQUIRE(run_cli("stationary --config " + (tmp.path / "cfg.json").string() + " --out " +
                  (tmp.path / "out").string() + " --jobs 2") == 0);
  for (const std::string name : {"000_summary.json", "001_summary.json"}) {
    const json s = json::parse(read_text_file((tmp.path / "out" / name).string()));
    CHECK(s.at("results").at("ok").get<bool>());
  }
}
