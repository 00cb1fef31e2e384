#pragma once
// Declarative experiment driver: a JSON config file selects a system, channel,
// scheme, grids and budgets; each subcommand writes deterministic CSV/JSON
// artifacts into the output directory.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "estent/channels.hpp"
#include "estent/harness.hpp"
#include "estent/systems.hpp"

namespace estent {

struct ExperimentConfig {
  nlohmann::json doc;  // the resolved document (seed/output_dir/threads final)
  std::string source_path;
  std::uint64_t seed = 0;
  std::string output_dir = ".";
  int threads = 1;
};

// Parses the config file and applies overrides.  Seed precedence: --seed flag,
// then the ESTENT_SEED environment variable, then the config field; a config
// without any of the three is rejected (no silent nondeterminism).  JSON
// syntax errors are reported with file:line:column.
ExperimentConfig load_experiment_config(
    const std::string& path,
    const std::optional<std::uint64_t>& seed_flag = std::nullopt,
    const std::optional<std::string>& output_dir_flag = std::nullopt,
    const std::optional<int>& threads_flag = std::nullopt);

// Config fragments shared by the subcommands.
SystemModel system_from_json(const nlohmann::json& spec, const std::string& where);
Channel channel_from_json(const nlohmann::json& spec, const std::string& where);
std::unique_ptr<Scheme> scheme_from_json(const nlohmann::json& spec,
                                         const SystemModel& system,
                                         const Channel& channel, double epsilon,
                                         int horizon, std::uint64_t seed);

// Subcommands; all write files under config.output_dir and throw config_error
// or invariant_error (exit codes 2 and 3 in the binary).
void cmd_entropy(const ExperimentConfig& config);   // entropy_table.csv + entropy_summary.json
void cmd_bounds(const ExperimentConfig& config);    // bounds.json + optional ar_rd_curve_<i>.csv
void cmd_simulate(const ExperimentConfig& config);  // objective_report.json + optional traces.csv
void cmd_sweep(const ExperimentConfig& config);     // capacity_sweep.csv + sweep_summary.json

void run_subcommand(const std::string& name, const ExperimentConfig& config);

}  // namespace estent
