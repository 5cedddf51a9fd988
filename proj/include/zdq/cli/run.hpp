#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "zdq/cli/config.hpp"

namespace zdq::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitConfig = 2;

// Command-line values that take precedence over the config file.
struct RunOverrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> budget;
};

// Runs one task and writes results.json, timing.json and the task CSVs into
// the output directory. Returns the process exit code; diagnostics go to err.
int run(Task task, const std::string& config_path, const RunOverrides& overrides,
        std::ostream& out, std::ostream& err);

int run(Task task, ExperimentConfig config, std::ostream& out, std::ostream& err);

// SHA-1 of "blob <size>\0<content>", as git hashes file contents.
std::string git_blob_sha1(const std::string& content);

// Mantissa with one decimal and a bare exponent, e.g. 0.0e0, 3.1e-13.
std::string format_short_scientific(double v);

}  // namespace zdq::cli
