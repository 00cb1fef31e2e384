// Command-line entry point: estent <subcommand> <config.json> [overrides].

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "estent/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"State-estimation experiments: entropy estimates, capacity "
               "bounds, scheme simulation and capacity sweeps"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed_value = 0;
  std::string output_dir_value;
  int threads_value = 0;
  CLI::App* chosen = nullptr;
  for (const char* name : {"entropy", "bounds", "simulate", "sweep"}) {
    CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name +
                                                 " experiment from a config file");
    sub->add_option("config", config_path, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", seed_value, "override the config seed");
    sub->add_option("--output-dir", output_dir_value,
                    "override the config output directory");
    sub->add_option("--threads", threads_value, "cap the worker thread count");
    sub->callback([&chosen, sub] { chosen = sub; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // bad invocation is a config error
  }

  try {
    std::optional<std::uint64_t> seed_flag;
    std::optional<std::string> output_flag;
    std::optional<int> threads_flag;
    if (chosen->count("--seed")) seed_flag = seed_value;
    if (chosen->count("--output-dir")) output_flag = output_dir_value;
    if (chosen->count("--threads")) threads_flag = threads_value;
    estent::ExperimentConfig config = estent::load_experiment_config(
        config_path, seed_flag, output_flag, threads_flag);
    estent::run_subcommand(chosen->get_name(), config);
  } catch (const estent::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const estent::invariant_error& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
