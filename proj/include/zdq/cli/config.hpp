#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "zdq/error.hpp"
#include "zdq/source_models.hpp"

namespace zdq::cli {

using json = nlohmann::json;

enum class Task { design, rollout, oracle_check, discounted_vi, schedule, occupancy };

std::optional<Task> parse_task(std::string_view name);
std::string_view task_name(Task task);

// Invalid configuration; `field` is the dotted path of the offending entry
// (or "line:column" for syntax errors).
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct GridConfig {
  std::optional<double> lo;
  std::optional<double> hi;
  std::size_t points = 801;
  double width = 8.0;  // stationary standard deviations each side
};

struct ModelConfig {
  enum class Kind { finite_chain, linear_gaussian };
  Kind kind = Kind::finite_chain;
  // finite_chain
  std::vector<std::vector<double>> transition;
  std::optional<std::vector<double>> initial;  // nullopt: invariant distribution
  std::vector<double> state_values;
  // linear_gaussian
  double a = 0.0;
  double sigma = 1.0;
  std::optional<InitialLaw> initial_law;  // nullopt: stationary
  GridConfig grid;
};

struct CostConfig {
  bool quadratic = true;
  std::vector<std::vector<double>> table;
  std::vector<double> reconstructions;
};

struct QuantizerConfig {
  std::size_t levels = 2;
  double lo = -2.0;
  double hi = 2.0;
  std::size_t steps = 41;
};

struct BinningConfig {
  std::size_t bins = 50;  // simplex coordinate or mean axis
  std::size_t std_bins = 20;
  double mean_lo = -3.0, mean_hi = 3.0;
  double std_lo = 0.0, std_hi = 2.0;
};

struct PolicyConfig {
  enum class Kind { dp, greedy, pieced, randomized };
  Kind kind = Kind::dp;
  std::vector<std::vector<double>> table;  // randomized: one row per bin
  std::vector<double> row;                 // randomized: same row for every bin
  BinningConfig binning;
};

struct RolloutConfig {
  std::optional<std::uint64_t> steps;
  std::size_t paths = 1;
};

struct ScheduleConfig {
  std::vector<std::uint64_t> horizons;
  std::size_t k_max = 1;
};

struct ViConfig {
  double discount = 0.9;
  std::size_t resolution = 200;
  double tol = 1e-9;
  std::size_t max_iter = 400;
  // linear_gaussian: normal beliefs on a (mean, std) mesh
  double mean_lo = -2.0, mean_hi = 2.0;
  std::size_t mean_count = 21;
  double std_lo = 0.5, std_hi = 1.5;
  std::size_t std_count = 5;
};

struct OccupancyConfig {
  std::uint64_t steps = 100000;
  std::optional<std::uint64_t> compare_seed;
};

struct ExperimentConfig {
  std::optional<Task> task;
  std::optional<std::uint64_t> seed;
  std::optional<ModelConfig> model;
  CostConfig cost;
  std::optional<QuantizerConfig> quantizers;
  std::optional<std::size_t> horizon;
  std::size_t budget = 2'000'000;
  double prune_mass = 1e-9;
  std::optional<PolicyConfig> policy;
  RolloutConfig rollout;
  std::optional<ScheduleConfig> schedule;
  ViConfig vi;
  OccupancyConfig occupancy;
  std::string output_dir = ".";
};

// Schema validation: unknown keys and wrong types raise ConfigError.
ExperimentConfig parse_config(const json& doc);

// Reads and parses a config file; syntax errors carry line and column.
json read_config_file(const std::string& path);

// Task-specific requirements (e.g. a seed for stochastic tasks).
void validate_for_task(const ExperimentConfig& config, Task task);

// Canonical JSON echo of the effective configuration, without the output
// directory (it does not affect results).
json echo(const ExperimentConfig& config);

}  // namespace zdq::cli
