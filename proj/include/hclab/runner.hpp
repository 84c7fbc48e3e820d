#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hclab/config.hpp"

namespace hclab {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitSchema = 2, kExitSolver = 3, kExitGeometry = 4 };

/// Files produced by one pipeline run, keyed by relative name. `timing` holds
/// wall-clock measurements, kept apart so the numeric outputs reproduce byte for byte.
struct RunOutputs {
  std::map<std::string, std::string> files;
  std::vector<std::pair<std::string, double>> timing;
  std::string environment_hash;  // git blob hash of the encoded environment
  Json summary = Json::object();
};

const std::vector<std::string>& subcommands();

/// Executes a subcommand pipeline in memory. Throws the library errors.
RunOutputs execute(const std::string& subcommand, const ExperimentConfig& config);

struct RunOptions {
  std::filesystem::path config_path;
  std::optional<std::uint64_t> seed_override;
  int threads = 0;
  std::optional<std::filesystem::path> out;
};

/// Runs a subcommand end to end (outputs, timing.csv, manifest.json) and maps
/// errors to exit codes. `validate` prints diagnostics and returns 0 when clean.
int run(const std::string& subcommand, const RunOptions& options, std::ostream& log);

}  // namespace hclab
