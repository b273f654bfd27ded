#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "parking/stats.hpp"
#include "parking/topology.hpp"

namespace parking {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Declarative run description. Parsed from a JSON object with a closed key
/// set; any unknown key or ill-typed value is a ConfigError.
struct RunConfig {
  TopologySpec topology;
  std::vector<double> p_grid;          // "p" (single) or "p_grid"
  std::optional<std::uint64_t> seed;   // generated and filled in when absent
  std::vector<std::uint64_t> seeds;    // explicit replica seeds; overrides derivation from seed
  std::uint64_t t_max{100};
  std::uint64_t t_cap{1000000};
  bool run_to_absorption{false};
  std::size_t replicas{1};
  unsigned workers{1};
  bool track_nearest{true};
  bool record_trajectories{false};
  std::vector<std::uint64_t> snapshot_times;
  std::uint64_t snapshot_every{0};
  std::string output_dir{"."};
  std::optional<stats::Window> window;
  double work_budget{1e12};

  double p() const { return p_grid.at(0); }
  std::size_t replica_count() const { return seeds.empty() ? replicas : seeds.size(); }
  void validate() const;
};

RunConfig parse_run_config(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& config);
nlohmann::json to_json(const TopologySpec& spec);
TopologySpec topology_from_json(const nlohmann::json& j);

RunConfig load_run_config(const std::string& path);

}  // namespace parking
