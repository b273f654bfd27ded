#include "parking/config.hpp"

#include <fstream>
#include <set>

namespace parking {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid value for '") + key + "': " + e.what());
  }
}

std::uint64_t get_count(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
    throw ConfigError(std::string("'") + key + "' must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

}  // namespace

TopologySpec topology_from_json(const json& j) {
  reject_unknown(j, {"family", "dimension", "side", "boundary"}, "topology");
  TopologySpec spec;
  try {
    spec.family = family_from_string(get<std::string>(j, "family"));
    if (j.contains("boundary")) spec.boundary = boundary_from_string(get<std::string>(j, "boundary"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!j.contains("side")) throw ConfigError("topology.side is required");
  spec.side = static_cast<std::uint32_t>(get_count(j, "side"));
  spec.dimension = j.contains("dimension") ? static_cast<std::uint32_t>(get_count(j, "dimension")) : 1;
  return spec;
}

json to_json(const TopologySpec& spec) {
  json j{{"family", to_string(spec.family)}, {"dimension", spec.dimension}, {"side", spec.side}};
  if (spec.family == Family::Path1D) j["boundary"] = to_string(spec.boundary);
  return j;
}

RunConfig parse_run_config(const json& j) {
  reject_unknown(j,
                 {"topology", "p", "p_grid", "seed", "seeds", "t_max", "t_cap", "run_to_absorption",
                  "replicas", "workers", "track_nearest", "record_trajectories", "snapshot_times",
                  "snapshot_every", "output_dir", "window", "work_budget"},
                 "run config");
  RunConfig c;
  if (!j.contains("topology")) throw ConfigError("run config requires 'topology'");
  c.topology = topology_from_json(j.at("topology"));
  if (j.contains("p") && j.contains("p_grid")) throw ConfigError("give either 'p' or 'p_grid', not both");
  if (j.contains("p")) c.p_grid = {get<double>(j, "p")};
  if (j.contains("p_grid")) c.p_grid = get<std::vector<double>>(j, "p_grid");
  if (j.contains("seed")) c.seed = get_count(j, "seed");
  if (j.contains("seeds")) c.seeds = get<std::vector<std::uint64_t>>(j, "seeds");
  if (j.contains("t_max")) c.t_max = get_count(j, "t_max");
  if (j.contains("t_cap")) c.t_cap = get_count(j, "t_cap");
  if (j.contains("run_to_absorption")) c.run_to_absorption = get<bool>(j, "run_to_absorption");
  if (j.contains("replicas")) c.replicas = get_count(j, "replicas");
  if (j.contains("workers")) c.workers = static_cast<unsigned>(get_count(j, "workers"));
  if (j.contains("track_nearest")) c.track_nearest = get<bool>(j, "track_nearest");
  if (j.contains("record_trajectories")) c.record_trajectories = get<bool>(j, "record_trajectories");
  if (j.contains("snapshot_times")) c.snapshot_times = get<std::vector<std::uint64_t>>(j, "snapshot_times");
  if (j.contains("snapshot_every")) c.snapshot_every = get_count(j, "snapshot_every");
  if (j.contains("output_dir")) c.output_dir = get<std::string>(j, "output_dir");
  if (j.contains("window")) {
    const auto w = get<std::vector<std::uint64_t>>(j, "window");
    if (w.size() != 2) throw ConfigError("'window' must be [t_lo, t_hi]");
    c.window = stats::Window{w[0], w[1]};
  }
  if (j.contains("work_budget")) c.work_budget = get<double>(j, "work_budget");
  c.validate();
  return c;
}

void RunConfig::validate() const {
  try {
    Topology probe_dims(TopologySpec{topology.family, topology.dimension, 3,
                                     topology.boundary});
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid topology: ") + e.what());
  }
  const bool periodic = topology.family != Family::Path1D || topology.boundary == Boundary::Periodic;
  if (topology.side < (periodic ? 3u : 2u)) throw ConfigError("topology.side too small");
  if (p_grid.empty()) throw ConfigError("run config requires 'p' or a nonempty 'p_grid'");
  for (double p : p_grid) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("every p must lie in [0,1]");
  }
  if (seed && !seeds.empty()) throw ConfigError("give either 'seed' or 'seeds', not both");
  if (replicas < 1) throw ConfigError("'replicas' must be >= 1");
  if (workers < 1) throw ConfigError("'workers' must be >= 1");
  if (window && window->t_lo >= window->t_hi) throw ConfigError("'window' must satisfy t_lo < t_hi");
  if (!(work_budget > 0)) throw ConfigError("'work_budget' must be positive");
}

json to_json(const RunConfig& c) {
  json j;
  j["topology"] = to_json(c.topology);
  if (c.p_grid.size() == 1) {
    j["p"] = c.p_grid.front();
  } else {
    j["p_grid"] = c.p_grid;
  }
  if (c.seed) j["seed"] = *c.seed;
  if (!c.seeds.empty()) j["seeds"] = c.seeds;
  j["t_max"] = c.t_max;
  j["t_cap"] = c.t_cap;
  j["run_to_absorption"] = c.run_to_absorption;
  j["replicas"] = c.replicas;
  j["workers"] = c.workers;
  j["track_nearest"] = c.track_nearest;
  j["record_trajectories"] = c.record_trajectories;
  j["snapshot_times"] = c.snapshot_times;
  j["snapshot_every"] = c.snapshot_every;
  j["output_dir"] = c.output_dir;
  if (c.window) j["window"] = {c.window->t_lo, c.window->t_hi};
  j["work_budget"] = c.work_budget;
  return j;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_run_config(j);
}

}  // namespace parking
