#include "parking/commands.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>

#include "parking/parallel.hpp"
#include "parking/stats.hpp"

namespace parking {

using nlohmann::json;

namespace {

json nullable(const std::optional<std::uint64_t>& v) { return v ? json(*v) : json(nullptr); }
json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json run_checks(const SimState& state, bool& all_passed) {
  json checks = json::array();
  const auto cons = conservation_check(state);
  const auto vis = visit_identity_check(state);
  auto add = [&](const std::string& name, bool passed, json expected, json actual) {
    checks.push_back({{"name", name}, {"passed", passed}, {"expected", expected}, {"actual", actual}});
    all_passed = all_passed && passed;
  };
  add("parked_equals_occupied", cons.parked_equals_occupied, state.parked_cars(),
      state.occupied_spots());
  add("balance_preserved", cons.balance_preserved,
      static_cast<std::int64_t>(state.n_cars()) - static_cast<std::int64_t>(state.n_spots()),
      static_cast<std::int64_t>(state.unparked_cars()) -
          static_cast<std::int64_t>(state.vacant_spots()));
  add("vacant_equals_unvisited", cons.vacant_equals_unvisited, state.vacant_spots(),
      state.unvisited_spots());
  add("counters_consistent", cons.counters_consistent, true, cons.counters_consistent);
  add("visit_identity", vis.holds(), vis.total_moves, vis.total_visits);
  return checks;
}

json fit_json(const std::vector<ObservableRow>& rows, stats::Window window) {
  json fit{{"window", {window.t_lo, window.t_hi}}, {"model", "log_vbar_on_log_t"}};
  try {
    const auto f = stats::fit_power_law(rows, window);
    fit["slope"] = f.slope;
    fit["intercept"] = f.intercept;
    fit["points"] = f.points;
    fit["rss"] = f.rss;
  } catch (const std::invalid_argument& e) {
    fit["slope"] = nullptr;
    fit["intercept"] = nullptr;
    fit["points"] = 0;
    fit["error"] = e.what();
  }
  return fit;
}

std::vector<std::uint64_t> snapshot_schedule(const RunConfig& c, std::uint64_t horizon) {
  std::set<std::uint64_t> times(c.snapshot_times.begin(), c.snapshot_times.end());
  if (c.snapshot_every > 0) {
    for (std::uint64_t t = 0; t <= horizon; t += c.snapshot_every) times.insert(t);
  }
  return {times.begin(), times.end()};
}

std::string trajectories_csv(const SimState& state, const json& config) {
  std::ostringstream out;
  io::write_preamble(out, config);
  out << "origin,park_time,path\n";
  for (std::uint32_t i = 0; i < state.cars().size(); ++i) {
    const auto& car = state.cars()[i];
    out << car.origin << ',';
    if (car.parked()) out << car.park_time;
    out << ',';
    const auto& path = state.trajectory(i);
    for (std::size_t k = 0; k < path.size(); ++k) out << (k ? ";" : "") << path[k];
    out << '\n';
  }
  return out.str();
}

}  // namespace

RunConfig resolve_seed(RunConfig config, std::uint64_t generated) {
  if (!config.seed && config.seeds.empty()) config.seed = generated;
  return config;
}

CommandResult simulate(const RunConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  if (cfg.p_grid.size() != 1) throw ConfigError("simulate takes a single p; use sweep for a grid");
  if (!cfg.seeds.empty()) throw ConfigError("simulate takes a single seed; use sweep for a seed list");
  if (!cfg.seed) throw ConfigError("simulate needs a seed");
  const json config = to_json(cfg);
  const std::uint64_t seed = *cfg.seed;
  auto topology = std::make_shared<const Topology>(cfg.topology);
  const std::uint64_t horizon = cfg.run_to_absorption ? cfg.t_cap : cfg.t_max;

  RunOptions options;
  options.track_nearest = cfg.track_nearest;
  options.record_trajectories = cfg.record_trajectories;
  options.keep_final_state = true;
  options.snapshot_times = snapshot_schedule(cfg, horizon);
  options.work_budget = cfg.work_budget;

  if (progress) {
    progress("simulate: " + std::to_string(topology->vertex_count()) + " vertices, p=" +
             io::format_double(cfg.p()) + ", horizon " + std::to_string(horizon));
  }
  SimSeries series = cfg.run_to_absorption
                         ? run_to_absorption(topology, cfg.p(), seed, cfg.t_cap, options).series
                         : run(topology, cfg.p(), seed, cfg.t_max, options);
  if (progress) progress("simulate: finished at t=" + std::to_string(series.t_final()));

  CommandResult result;
  const auto probs = stats::empirical_park_probs(series);
  json summary;
  summary["format_version"] = io::kFormatVersion;
  summary["config"] = config;
  summary["seed"] = seed;
  summary["absorption_time"] = nullable(series.absorption_time);
  summary["saturation_time"] = nullable(series.saturation_time);
  summary["t_final"] = series.t_final();
  summary["n_vertices"] = series.n_vertices;
  summary["n_cars"] = series.n_cars;
  summary["n_spots"] = series.n_spots;
  summary["parked_cars"] = series.parked_cars;
  summary["vbar_final"] = series.rows.back().vbar;
  summary["frac_cars_parked"] = nullable(probs.frac_cars_parked);
  summary["frac_spots_parked_in"] = nullable(probs.frac_spots_parked_in);
  summary["fit"] = fit_json(series.rows, cfg.window ? *cfg.window : stats::default_window(cfg.topology));
  summary["checks"] = run_checks(*series.final_state, result.checks_passed);

  std::ostringstream csv;
  io::write_series_csv(csv, series.rows, config);
  result.files.push_back({"series.csv", csv.str()});
  for (const auto& snap : series.snapshots) {
    std::ostringstream out;
    const auto labels = nearest_type_classify(*topology, snap);
    io::write_snapshot_csv(out, *topology, snap, &labels, config);
    result.files.push_back({"snapshot_t" + std::to_string(snap.time) + ".csv", out.str()});
  }
  if (cfg.record_trajectories) {
    result.files.push_back({"trajectories.csv", trajectories_csv(*series.final_state, config)});
  }
  result.files.push_back({"summary.json", io::dump_json(summary)});
  result.summary = std::move(summary);
  return result;
}

CommandResult sweep(const RunConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  if (!cfg.seed && cfg.seeds.empty()) throw ConfigError("sweep needs a seed or a seed list");
  const json config = to_json(cfg);
  auto topology = std::make_shared<const Topology>(cfg.topology);
  const std::size_t replicas = cfg.replica_count();

  std::vector<double> grid = cfg.p_grid;
  std::stable_sort(grid.begin(), grid.end());
  std::vector<std::uint64_t> seeds(replicas);
  for (std::size_t r = 0; r < replicas; ++r) {
    seeds[r] = cfg.seeds.empty() ? derive_seed(*cfg.seed, r) : cfg.seeds[r];
  }

  RunOptions options;
  options.keep_final_state = true;
  options.work_budget = cfg.work_budget;

  const std::size_t jobs = grid.size() * replicas;
  std::vector<io::SweepRow> rows(jobs);
  std::vector<char> checks_ok(jobs, 0);
  std::mutex progress_mutex;
  std::size_t done = 0;
  parallel_for(jobs, cfg.workers, [&](std::size_t job) {
    const double p = grid[job / replicas];
    const std::size_t r = job % replicas;
    SimSeries s = cfg.run_to_absorption
                      ? run_to_absorption(topology, p, seeds[r], cfg.t_cap, options).series
                      : run(topology, p, seeds[r], cfg.t_max, options);
    const auto& last = s.rows.back();
    rows[job] = io::SweepRow{p,        r,         seeds[r],           s.t_final(),
                             s.absorption_time, last.vbar, s.n_cars, s.n_spots,
                             last.unparked_cars, last.vacant_spots};
    checks_ok[job] = conservation_check(*s.final_state).ok() && visit_identity_check(*s.final_state).holds();
    if (progress) {
      std::lock_guard lock(progress_mutex);
      ++done;
      progress("sweep: " + std::to_string(done) + "/" + std::to_string(jobs) + " (p=" +
               io::format_double(p) + ", replica " + std::to_string(r) + ")");
    }
  });

  std::vector<io::SweepAggregate> aggregates;
  json points = json::array();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> vbars;
    io::SweepAggregate agg;
    agg.p = grid[i];
    agg.replicas = replicas;
    std::uint64_t cars = 0, spots = 0, parked = 0;
    for (std::size_t r = 0; r < replicas; ++r) {
      const auto& row = rows[i * replicas + r];
      vbars.push_back(row.vbar);
      if (row.absorption_time) ++agg.absorbed;
      cars += row.n_cars;
      spots += row.n_spots;
      parked += row.n_cars - row.unparked_cars;
    }
    const auto est = stats::estimate_mean(vbars);
    agg.vbar_mean = est.mean;
    agg.vbar_se = est.standard_error;
    agg.frac_cars_parked = cars ? static_cast<double>(parked) / cars : std::nan("");
    agg.frac_spots_parked_in = spots ? static_cast<double>(parked) / spots : std::nan("");
    aggregates.push_back(agg);
    points.push_back({{"p", agg.p},
                      {"replicas", agg.replicas},
                      {"absorbed", agg.absorbed},
                      {"vbar_mean", agg.vbar_mean},
                      {"vbar_se", agg.vbar_se},
                      {"frac_cars_parked", cars ? json(agg.frac_cars_parked) : json(nullptr)},
                      {"frac_spots_parked_in", spots ? json(agg.frac_spots_parked_in) : json(nullptr)}});
  }

  CommandResult result;
  const auto failed = static_cast<std::size_t>(std::count(checks_ok.begin(), checks_ok.end(), 0));
  result.checks_passed = failed == 0;
  json summary;
  summary["format_version"] = io::kFormatVersion;
  summary["config"] = config;
  summary["seed"] = cfg.seed ? json(*cfg.seed) : json(nullptr);
  summary["replica_seeds"] = seeds;
  summary["points"] = points;
  summary["checks"] = json::array({{{"name", "pathwise_identities"},
                                    {"passed", failed == 0},
                                    {"expected", 0},
                                    {"actual", failed}}});

  std::ostringstream table, agg_table;
  io::write_sweep_csv(table, rows, config);
  io::write_sweep_summary_csv(agg_table, aggregates, config);
  result.files.push_back({"sweep.csv", table.str()});
  result.files.push_back({"sweep_summary.csv", agg_table.str()});
  result.files.push_back({"summary.json", io::dump_json(summary)});
  result.summary = std::move(summary);
  return result;
}

void write_outputs(const CommandResult& result, const std::string& output_dir) {
  for (const auto& f : result.files) io::write_file(output_dir + "/" + f.name, f.content);
}

}  // namespace parking
