#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "ergode/config.hpp"
#include "ergode/report.hpp"

namespace ergode {

enum ExitCode { kExitOk = 0, kExitValidation = 2, kExitBudget = 3 };

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;  // overrides the config's output
  bool diagnostics = false;
  std::optional<std::uint64_t> seed_override;
};

/// Runs one validated config, appending rows to `report` in config order.
/// Errors propagate with the rows produced so far left in place.
void execute(const ExperimentConfig& config, Report& report);

/// Reads, validates and runs a config file. A config that fails validation
/// writes nothing; a run that fails midway flushes its rows flagged incomplete.
int run(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& log);

/// Parses ERGODE_SEED-style text; throws ValidationError unless it is a
/// nonnegative decimal integer.
std::uint64_t parse_seed(const std::string& text);

}  // namespace ergode
