#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "parking/config.hpp"
#include "parking/io.hpp"

namespace parking {

/// Called with a short human-readable line; the CLI routes it to stderr.
using ProgressFn = std::function<void(const std::string&)>;

struct OutputFile {
  std::string name;  // relative to the output directory
  std::string content;
};

struct CommandResult {
  nlohmann::json summary;
  std::vector<OutputFile> files;
  bool checks_passed{true};
};

/// Fills in a generated seed when the config has none.
RunConfig resolve_seed(RunConfig config, std::uint64_t generated);

/// One run: series.csv, summary.json and snapshot_t<T>.csv per requested time.
/// The config must carry a seed (see resolve_seed).
CommandResult simulate(const RunConfig& config, const ProgressFn& progress = {});

/// Every (p, replica) pair: sweep.csv, sweep_summary.csv and summary.json.
CommandResult sweep(const RunConfig& config, const ProgressFn& progress = {});

void write_outputs(const CommandResult& result, const std::string& output_dir);

}  // namespace parking
