#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "zdq/cli/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Zero-delay quantizer design and simulation"};
  std::string task_text;
  std::string config;
  zdq::cli::RunOverrides overrides;
  app.add_option("task", task_text,
                 "design | rollout | oracle-check | discounted-vi | schedule | occupancy")
      ->required();
  app.add_option("--config", config, "Experiment config (JSON)")->required();
  app.add_option("--out", overrides.out, "Output directory (overrides output_dir)");
  app.add_option("--seed", overrides.seed, "Root seed (overrides seed)");
  app.add_option("--budget", overrides.budget, "DP node budget (overrides budget)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return zdq::cli::kExitConfig;
  }

  const auto task = zdq::cli::parse_task(task_text);
  if (!task) {
    std::cerr << "config error: task: unknown task \"" << task_text << "\"\n";
    return zdq::cli::kExitConfig;
  }
  return zdq::cli::run(*task, config, overrides, std::cout, std::cerr);
}
