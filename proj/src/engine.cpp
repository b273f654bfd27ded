#include "parking/engine.hpp"

#include <algorithm>

namespace parking {

std::string to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::ParkTime: return "park_time";
    case ViolationKind::Visits: return "visits";
    case ViolationKind::Nesting: return "nesting";
  }
  return "unknown";
}

namespace {

void check_budget(const SimState& state, std::uint64_t steps, const RunOptions& options) {
  const double work = static_cast<double>(state.vertex_count()) * static_cast<double>(steps);
  if (work > options.work_budget) {
    throw BudgetExceeded("run of " + std::to_string(steps) + " steps on " +
                         std::to_string(state.vertex_count()) +
                         " vertices exceeds the work budget");
  }
  if (options.record_trajectories &&
      static_cast<double>(state.n_cars()) * static_cast<double>(steps) > options.trajectory_budget) {
    throw BudgetExceeded("trajectory log would exceed the trajectory budget");
  }
}

}  // namespace

SimSeries run_state(SimState state, const RandomnessSource& source, std::uint64_t t_max,
                    const RunOptions& options, bool stop_on_absorption) {
  if (t_max < state.time()) throw std::invalid_argument("t_max precedes the current time");
  check_budget(state, t_max - state.time(), options);

  SimSeries series;
  series.topology = state.topology().spec();
  series.seed = source.seed();
  series.n_vertices = state.vertex_count();
  series.n_cars = state.n_cars();
  series.n_spots = state.n_spots();
  series.p = series.n_vertices ? static_cast<double>(series.n_cars) / series.n_vertices : 0.0;
  series.rows.reserve(t_max - state.time() + 1);

  auto snapshot_times = options.snapshot_times;
  std::sort(snapshot_times.begin(), snapshot_times.end());
  auto next_snapshot = snapshot_times.begin();

  auto record = [&] {
    series.rows.push_back(observables_row(state, options.track_nearest));
    if (!series.saturation_time && state.vacant_spots() == 0) series.saturation_time = state.time();
    if (!series.absorption_time && state.unparked_cars() == 0) series.absorption_time = state.time();
    while (next_snapshot != snapshot_times.end() && *next_snapshot <= state.time()) {
      if (*next_snapshot == state.time()) series.snapshots.push_back(snapshot(state));
      ++next_snapshot;
    }
  };

  record();
  while (state.time() < t_max) {
    if (stop_on_absorption && state.unparked_cars() == 0) break;
    step(state, source, options.order);
    record();
  }
  series.parked_cars = state.parked_cars();
  if (options.keep_final_state) series.final_state.emplace(std::move(state));
  return series;
}

SimSeries run(std::shared_ptr<const Topology> topology, double p, std::uint64_t seed,
              std::uint64_t t_max, const RunOptions& options) {
  const RandomnessSource source(seed);
  auto config = sample_initial(*topology, p, source);
  SimState state(std::move(topology), config, options.record_trajectories);
  auto series = run_state(std::move(state), source, t_max, options, false);
  series.p = p;
  return series;
}

AbsorptionResult run_to_absorption(std::shared_ptr<const Topology> topology, double p,
                                   std::uint64_t seed, std::uint64_t t_cap,
                                   const RunOptions& options) {
  const RandomnessSource source(seed);
  auto config = sample_initial(*topology, p, source);
  SimState state(std::move(topology), config, options.record_trajectories);
  AbsorptionResult result{run_state(std::move(state), source, t_cap, options, true), {}};
  result.series.p = p;
  result.absorption_time = result.series.absorption_time;
  return result;
}

CouplingReport couple_run(std::shared_ptr<const Topology> topology, double p_low, double p_high,
                          std::uint64_t seed, std::uint64_t t_max) {
  if (!(0.0 <= p_low && p_low <= p_high && p_high <= 1.0))
    throw std::invalid_argument("couple_run requires 0 <= p_low <= p_high <= 1");
  constexpr std::size_t kMaxRecorded = 32;

  const RandomnessSource source(seed);
  SimState low(topology, sample_initial(*topology, p_low, source));
  SimState high(topology, sample_initial(*topology, p_high, source));

  CouplingReport report;
  report.p_low = p_low;
  report.p_high = p_high;
  report.seed = seed;
  report.t_max = t_max;
  auto flag = [&](ViolationKind kind, std::uint64_t t, Vertex v, std::uint64_t a, std::uint64_t b) {
    ++report.violation_count;
    if (report.violations.size() < kMaxRecorded) report.violations.push_back({kind, t, v, a, b});
  };

  const auto n = topology->vertex_count();
  for (Vertex v = 0; v < n; ++v) {
    if (low.role(v) == Role::Car && high.role(v) != Role::Car) flag(ViolationKind::Nesting, 0, v, 1, 0);
  }

  bool identical = low == high;
  for (std::uint64_t t = 1; t <= t_max; ++t) {
    step(low, source);
    step(high, source);
    for (Vertex v = 0; v < n; ++v) {
      if (low.visits(v) > high.visits(v)) flag(ViolationKind::Visits, t, v, low.visits(v), high.visits(v));
    }
    report.visit_comparisons += n;
    identical = identical && low == high;
  }
  for (const auto& car : low.cars()) {
    const auto idx = high.car_at_origin(car.origin);
    if (idx < 0) continue;
    const auto& other = high.cars()[static_cast<std::size_t>(idx)];
    ++report.cars_compared;
    if (car.park_time > other.park_time) {
      flag(ViolationKind::ParkTime, t_max, car.origin, car.park_time, other.park_time);
    }
  }
  report.identical_trajectories = identical;
  return report;
}

}  // namespace parking
