#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "parking/observables.hpp"
#include "parking/state.hpp"

namespace parking {

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  bool track_nearest{false};
  bool record_trajectories{false};
  bool keep_final_state{false};
  std::vector<std::uint64_t> snapshot_times;
  /// Upper bound on vertex_count * steps; exceeding it throws BudgetExceeded.
  double work_budget{1e12};
  /// Upper bound on stored trajectory entries (cars * steps).
  double trajectory_budget{2e8};
  IterationOrder order{IterationOrder::Forward};
};

struct SimSeries {
  TopologySpec topology;
  double p{0.0};
  std::uint64_t seed{0};
  std::uint32_t n_vertices{0};
  std::uint32_t n_cars{0};
  std::uint32_t n_spots{0};
  std::vector<ObservableRow> rows;
  /// First time with no vacant spot left.
  std::optional<std::uint64_t> saturation_time;
  /// First time with no unparked car left.
  std::optional<std::uint64_t> absorption_time;
  std::uint32_t parked_cars{0};
  std::vector<Snapshot> snapshots;
  std::optional<SimState> final_state;

  std::uint64_t t_final() const { return rows.empty() ? 0 : rows.back().t; }
};

/// Steps an existing state until t_max (or absorption when stop_on_absorption)
/// and records one observable row per time, starting with the current time.
SimSeries run_state(SimState state, const RandomnessSource& source, std::uint64_t t_max,
                    const RunOptions& options = {}, bool stop_on_absorption = false);

SimSeries run(std::shared_ptr<const Topology> topology, double p, std::uint64_t seed,
              std::uint64_t t_max, const RunOptions& options = {});

struct AbsorptionResult {
  SimSeries series;
  std::optional<std::uint64_t> absorption_time;  // nullopt: NotAbsorbed by t_cap
  bool absorbed() const noexcept { return absorption_time.has_value(); }
};

AbsorptionResult run_to_absorption(std::shared_ptr<const Topology> topology, double p,
                                   std::uint64_t seed, std::uint64_t t_cap,
                                   const RunOptions& options = {});

enum class ViolationKind : std::uint8_t { ParkTime, Visits, Nesting };

struct CouplingViolation {
  ViolationKind kind;
  std::uint64_t t;
  Vertex vertex;  // car origin for ParkTime
  std::uint64_t low;
  std::uint64_t high;
};

struct CouplingReport {
  double p_low{0.0};
  double p_high{0.0};
  std::uint64_t seed{0};
  std::uint64_t t_max{0};
  std::uint64_t cars_compared{0};
  std::uint64_t visit_comparisons{0};
  std::uint64_t violation_count{0};
  std::vector<CouplingViolation> violations;  // first few, with full context
  bool identical_trajectories{false};

  bool ok() const noexcept { return violation_count == 0; }
};

/// Runs two simulations on shared WALK/TIE streams with nested ROLE outcomes
/// and checks park_time(low) <= park_time(high) for every low-density car and
/// V_t(low) <= V_t(high) at every vertex and time.
CouplingReport couple_run(std::shared_ptr<const Topology> topology, double p_low, double p_high,
                          std::uint64_t seed, std::uint64_t t_max);

std::string to_string(ViolationKind kind);

}  // namespace parking
