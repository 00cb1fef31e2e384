#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>
#include <json.hpp>

#include "estent/cli.hpp"

using namespace estent;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  fs::path dir = fs::temp_directory_path() / "estent_cli_tests";
  fs::create_directories(dir);
  return dir;
}

std::string write_raw(const std::string& name, const std::string& text) {
  fs::path path = scratch_dir() / name;
  std::ofstream(path, std::ios::binary) << text;
  return path.string();
}

std::string write_config(const std::string& name, const json& doc) {
  return write_raw(name, doc.dump(2) + "\n");
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct EnvSeedGuard {
  EnvSeedGuard() { unsetenv("ESTENT_SEED"); }
  ~EnvSeedGuard() { unsetenv("ESTENT_SEED"); }
};

json base_doc() {
  return json{{"seed", 5}, {"output_dir", (scratch_dir() / "out").string()}};
}

}  // namespace

TEST_CASE("config parse errors carry file, line and column") {
  EnvSeedGuard guard;
  std::string path = write_raw("broken.json", "{\n  \"seed\": 1,\n  broken\n}\n");
  try {
    load_experiment_config(path);
    FAIL("expected a config error");
  } catch (const config_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find(path) != std::string::npos);
    CHECK(msg.find(":3:") != std::string::npos);
  }
  CHECK_THROWS_AS(load_experiment_config((scratch_dir() / "nope.json").string()),
                  config_error);
  CHECK_THROWS_AS(
      load_experiment_config(write_raw("scalar.json", "42\n")), config_error);
}

TEST_CASE("seed resolution: flag beats environment beats config") {
  EnvSeedGuard guard;
  std::string path = write_config("seeds.json", json{{"seed", 5}});
  CHECK(load_experiment_config(path).seed == 5);

  setenv("ESTENT_SEED", "99", 1);
  CHECK(load_experiment_config(path).seed == 99);
  CHECK(load_experiment_config(path, std::uint64_t{123}).seed == 123);

  setenv("ESTENT_SEED", "not-a-number", 1);
  CHECK_THROWS_AS(load_experiment_config(path), config_error);
  unsetenv("ESTENT_SEED");

  std::string bare = write_config("no_seed.json", json::object());
  CHECK_THROWS_AS(load_experiment_config(bare), config_error);
  CHECK(load_experiment_config(bare, std::uint64_t{7}).seed == 7);
  std::string bad = write_config("neg_seed.json", json{{"seed", -3}});
  CHECK_THROWS_AS(load_experiment_config(bad), config_error);
}

TEST_CASE("overrides land in the resolved document") {
  EnvSeedGuard guard;
  std::string path =
      write_config("resolve.json", json{{"seed", 5}, {"threads", 2}});
  ExperimentConfig config = load_experiment_config(
      path, std::uint64_t{11}, std::string("elsewhere"), 3);
  CHECK(config.seed == 11);
  CHECK(config.output_dir == "elsewhere");
  CHECK(config.threads == 3);
  CHECK(config.doc["seed"] == 11);
  CHECK(config.doc["output_dir"] == "elsewhere");
  CHECK(config.doc["threads"] == 3);
  CHECK_THROWS_AS(
      load_experiment_config(path, std::nullopt, std::nullopt, 0), config_error);
}

TEST_CASE("channel and system fragments parse and validate") {
  CHECK(channel_from_json(json{{"kind", "noiseless"}}, "c").input_size == 2);
  CHECK(channel_from_json(json{{"kind", "noiseless"}, {"alphabet", 8}}, "c")
            .input_size == 8);
  Channel bsc = channel_from_json(json{{"kind", "bsc"}, {"p", 0.05}}, "c");
  CHECK(bsc.kind == ChannelKind::bsc);
  CHECK(bsc.p == 0.05);
  Channel er =
      channel_from_json(json{{"kind", "erasure"}, {"p", 0.2}, {"alphabet", 64}}, "c");
  CHECK(er.output_size == 65);
  Channel gen = channel_from_json(
      json{{"kind", "general"}, {"rows", {{0.9, 0.1}, {0.5, 0.5}}}}, "c");
  CHECK(gen.kind == ChannelKind::general);

  CHECK_THROWS_AS(channel_from_json(json{{"kind", "bsc"}}, "c"), config_error);
  CHECK_THROWS_AS(channel_from_json(json{{"kind", "smoke"}}, "c"), config_error);
  CHECK_THROWS_AS(channel_from_json(json::array(), "c"), config_error);

  SystemModel sys = system_from_json(
      json{{"name", "rotation_noise"},
           {"params", {{"alpha", 0.3}, {"noise", {{"kind", "none"}}}}}},
      "s");
  CHECK(sys.deterministic());
  CHECK_THROWS_AS(system_from_json(json{{"name", "warp_core"}}, "s"), config_error);
  CHECK_THROWS_AS(system_from_json(json{{"params", json::object()}}, "s"),
                  config_error);
}

TEST_CASE("bounds subcommand writes the catalog report") {
  EnvSeedGuard guard;
  json doc = base_doc();
  doc["output_dir"] = (scratch_dir() / "bounds_out").string();
  doc["bounds"] = json::array(
      {json{{"kind", "ha"}, {"eigenvalues", {2.0, 0.5}}},
       json{{"kind", "zoom_upper"}, {"eigenvalues", {2.0, 0.5}}},
       json{{"kind", "ar_rd"},
            {"a", {-2.0}},
            {"theta", 0.25},
            {"curve",
             {{"theta_min", 0.01}, {"theta_max", 1.0}, {"num_points", 5}}}},
       json{{"kind", "shannon_lb"},
            {"entropy_rate_bits", 2.0},
            {"N", 1},
            {"epsilon", 1e-4}},
       json{{"kind", "gl_upper"},
            {"epsilon", 1e-3},
            {"norm", 1.0}}});
  ExperimentConfig config = load_experiment_config(write_config("bounds.json", doc));
  cmd_bounds(config);

  json out = json::parse(slurp(fs::path(config.output_dir) / "bounds.json"));
  REQUIRE(out["reports"].size() == 5);
  CHECK(out["reports"][0]["kind"] == "ha");
  CHECK(out["reports"][0]["value_bits"] == 1.0);  // only the unstable pole counts
  CHECK(out["reports"][1]["value_bits"] == 1.0);
  CHECK(out["reports"][2]["details"]["correction_bits"] == 1.0);
  CHECK(out["reports"][2]["details"]["curve_file"] == "ar_rd_curve_2.csv");
  CHECK(out["config"]["seed"] == 5);

  std::string curve = slurp(fs::path(config.output_dir) / "ar_rd_curve_2.csv");
  CHECK(curve.rfind("theta,distortion,rate_bits,correction_bits\n", 0) == 0);
  CHECK(std::count(curve.begin(), curve.end(), '\n') == 6);  // header + 5 points

  doc["bounds"] = json::array({json{{"kind", "mystery"}}});
  CHECK_THROWS_AS(
      cmd_bounds(load_experiment_config(write_config("badbounds.json", doc))),
      config_error);
}

TEST_CASE("entropy subcommand reproduces the doubling rate and its table") {
  EnvSeedGuard guard;
  json doc{{"seed", 2024},
           {"output_dir", (scratch_dir() / "entropy_out").string()},
           {"system", {{"name", "doubling"}}},
           {"entropy_grid",
            {{"estimator", "topological"},
             {"epsilons", {0.25, 0.125, 0.0625, 0.03125}},
             {"horizons", {1, 2, 3, 4, 5, 6, 7, 8}},
             {"sample_size", 20000}}}};
  ExperimentConfig config =
      load_experiment_config(write_config("entropy.json", doc));
  cmd_entropy(config);

  json summary =
      json::parse(slurp(fs::path(config.output_dir) / "entropy_summary.json"));
  const double rate = summary["extrapolated_rate"].get<double>();
  CHECK(rate > 0.9);
  CHECK(rate < 1.1);
  CHECK(summary["per_epsilon_rate"].size() == 4);
  CHECK(summary["config"]["system"]["name"] == "doubling");

  std::string table = slurp(fs::path(config.output_dir) / "entropy_table.csv");
  CHECK(table.rfind("estimator,epsilon,horizon,count,rate_bits_per_step\n", 0) == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 1 + 4 * 8);
}

TEST_CASE("simulate subcommand certifies the stable zoom pair end to end") {
  EnvSeedGuard guard;
  json doc{{"seed", 7},
           {"output_dir", (scratch_dir() / "simulate_out").string()},
           {"system", {{"name", "linear"}, {"params", {{"A", {{2.0}}}}}}},
           {"channel", {{"kind", "erasure"}, {"p", 0.2}, {"alphabet", 64}}},
           {"scheme", {{"kind", "zoom"}, {"rates", {6}}, {"initial_halfwidth", {1.0}}}},
           {"objective",
            {{"epsilon", 0.001}, {"trials", 30}, {"horizon", 600}, {"trace_trials", 2}}}};
  ExperimentConfig config =
      load_experiment_config(write_config("simulate.json", doc));
  cmd_simulate(config);

  json out =
      json::parse(slurp(fs::path(config.output_dir) / "objective_report.json"));
  CHECK(out["report"]["e2_pass_fraction"] == 1.0);
  CHECK(out["scheme"]["name"] == "zoom");
  CHECK(out["scheme"]["stable"] == true);
  CHECK(out["config"]["objective"]["trials"] == 30);

  std::string traces = slurp(fs::path(config.output_dir) / "traces.csv");
  CHECK(traces.rfind("trial,t,state_0,estimate_0,", 0) == 0);
  CHECK(std::count(traces.begin(), traces.end(), '\n') == 1 + 2 * 600);
}

TEST_CASE("sweep subcommand writes the threshold table") {
  EnvSeedGuard guard;
  json channels = json::array();
  for (double p : {0.9, 0.8, 0.7})
    channels.push_back(json{{"kind", "erasure"}, {"p", p}, {"alphabet", 64}});
  json doc{{"seed", 60601},
           {"output_dir", (scratch_dir() / "sweep_out").string()},
           {"system", {{"name", "linear"}, {"params", {{"A", {{2.0}}}}}}},
           {"sweep",
            {{"family", "zoom"},
             {"rates", {6}},
             {"initial_halfwidth", {1.0}},
             {"channels", channels},
             {"epsilons", {0.001}},
             {"trials", 20},
             {"horizon", 1500}}}};
  ExperimentConfig config = load_experiment_config(write_config("sweep.json", doc));
  cmd_sweep(config);

  std::string csv = slurp(fs::path(config.output_dir) / "capacity_sweep.csv");
  CHECK(csv.rfind("epsilon,capacity_bits,grid_index,label,pass_fraction\n", 0) == 0);
  CHECK(csv.find("erasure_p0.8_m64") != std::string::npos);
  json summary =
      json::parse(slurp(fs::path(config.output_dir) / "sweep_summary.json"));
  CHECK(summary["table"]["rows"][0]["grid_index"] == 1);
  CHECK(summary["grid"].size() == 3);
}

TEST_CASE("identical config and seed reproduce byte-identical artifacts") {
  EnvSeedGuard guard;
  json doc{{"seed", 31},
           {"system", {{"name", "doubling"}}},
           {"entropy_grid",
            {{"epsilons", {0.25, 0.125}},
             {"horizons", {1, 2, 3, 4}},
             {"sample_size", 1500}}}};
  std::string path = write_config("repro.json", doc);
  fs::path dir_a = scratch_dir() / "repro_a";
  fs::path dir_b = scratch_dir() / "repro_b";
  cmd_entropy(load_experiment_config(path, std::nullopt, dir_a.string()));
  cmd_entropy(load_experiment_config(path, std::nullopt, dir_b.string()));
  CHECK(slurp(dir_a / "entropy_table.csv") == slurp(dir_b / "entropy_table.csv"));
  // summaries differ only through the resolved output_dir they embed
  json sum_a = json::parse(slurp(dir_a / "entropy_summary.json"));
  json sum_b = json::parse(slurp(dir_b / "entropy_summary.json"));
  sum_a["config"].erase("output_dir");
  sum_b["config"].erase("output_dir");
  CHECK(sum_a == sum_b);
}

TEST_CASE("unknown subcommands and estimators are rejected") {
  EnvSeedGuard guard;
  std::string path = write_config("mini.json", base_doc());
  ExperimentConfig config = load_experiment_config(path);
  CHECK_THROWS_AS(run_subcommand("teleport", config), config_error);

  json doc = base_doc();
  doc["system"] = json{{"name", "doubling"}};
  doc["entropy_grid"] = json{{"estimator", "psychic"},
                             {"epsilons", {0.25}},
                             {"horizons", {1, 2}}};
  CHECK_THROWS_AS(
      cmd_entropy(load_experiment_config(write_config("psychic.json", doc))),
      config_error);
}
