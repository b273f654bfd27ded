#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "parking/randomness.hpp"
#include "parking/topology.hpp"

namespace parking {

inline constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();

enum class Role : std::uint8_t { Car, Spot };
enum class SpotStatus : std::uint8_t { NotASpot, Vacant, Occupied };

struct InitialConfig {
  std::vector<Role> roles;
  std::uint32_t n_cars{0};
  std::uint32_t n_spots{0};
  double p{0.0};
  std::uint64_t seed{0};
};

/// Roles from the ROLE stream: v holds a car iff draw(ROLE, v, 0) < p, so
/// configurations built from one seed are nested in p.
InitialConfig sample_initial(const Topology& topology, double p, const RandomnessSource& source);
InitialConfig config_from_roles(std::vector<Role> roles);

struct CarRecord {
  Vertex origin{0};
  Vertex position{0};
  std::uint64_t park_time{kNever};

  bool parked() const noexcept { return park_time != kNever; }
  /// Number of moves (hence visits) made during steps 1..t.
  std::uint64_t moves_by(std::uint64_t t) const noexcept {
    return park_time == kNever ? t : std::min(park_time, t);
  }
  /// Count of times s in 1..t at which the car is unparked (tau truncated at t).
  std::uint64_t lifespan(std::uint64_t t) const noexcept {
    return park_time == kNever ? t : std::min(park_time - 1, t);
  }
  bool operator==(const CarRecord&) const = default;
};

enum class IterationOrder : std::uint8_t { Forward, Reversed };

class SimState {
 public:
  SimState(std::shared_ptr<const Topology> topology, const InitialConfig& config,
           bool record_trajectories = false);

  const Topology& topology() const noexcept { return *topology_; }
  const std::shared_ptr<const Topology>& topology_ptr() const noexcept { return topology_; }

  std::uint64_t time() const noexcept { return time_; }
  std::uint32_t vertex_count() const noexcept { return topology_->vertex_count(); }

  Role role(Vertex v) const { return roles_[v]; }
  const std::vector<Role>& roles() const noexcept { return roles_; }
  SpotStatus spot_status(Vertex v) const { return spot_status_[v]; }
  std::uint64_t occupied_at(Vertex v) const { return occupied_at_[v]; }
  std::uint64_t visits(Vertex v) const { return visits_[v]; }
  const std::vector<std::uint64_t>& visit_counts() const noexcept { return visits_; }

  const std::vector<CarRecord>& cars() const noexcept { return cars_; }
  /// Car index by origin vertex; -1 when the origin is a spot.
  std::int64_t car_at_origin(Vertex v) const { return car_index_[v]; }

  /// Indices into cars() of unparked cars, ascending.
  const std::vector<std::uint32_t>& unparked_indices() const noexcept { return active_; }

  std::uint32_t n_cars() const noexcept { return n_cars_; }
  std::uint32_t n_spots() const noexcept { return n_spots_; }
  std::uint32_t unparked_cars() const noexcept { return static_cast<std::uint32_t>(active_.size()); }
  std::uint32_t parked_cars() const noexcept { return n_cars_ - unparked_cars(); }
  std::uint32_t vacant_spots() const noexcept { return vacant_; }
  std::uint32_t occupied_spots() const noexcept { return n_spots_ - vacant_; }
  std::uint32_t unvisited_spots() const noexcept { return unvisited_spots_; }
  std::uint64_t total_visits() const noexcept { return sum_visits_; }
  std::uint64_t total_visits_sq() const noexcept { return sum_visits_sq_; }

  bool trajectories_recorded() const noexcept { return record_trajectories_; }
  /// Positions at times 0..min(park_time, t) for car index c.
  const std::vector<Vertex>& trajectory(std::uint32_t car) const;

  /// Compares the process state, ignoring engine bookkeeping order.
  bool operator==(const SimState& other) const;

 private:
  friend void step(SimState&, const RandomnessSource&, IterationOrder);
  friend struct StateMutator;

  void add_visit(Vertex v) noexcept;
  void park(std::uint32_t car, Vertex spot, std::uint64_t t) noexcept;

  std::shared_ptr<const Topology> topology_;
  std::uint64_t time_{0};
  std::vector<Role> roles_;
  std::vector<SpotStatus> spot_status_;
  std::vector<std::uint64_t> occupied_at_;
  std::vector<std::uint64_t> visits_;
  std::vector<CarRecord> cars_;
  std::vector<std::int64_t> car_index_;
  std::vector<std::uint32_t> active_;
  std::uint32_t n_cars_{0};
  std::uint32_t n_spots_{0};
  std::uint32_t vacant_{0};
  std::uint32_t unvisited_spots_{0};
  std::uint64_t sum_visits_{0};
  std::uint64_t sum_visits_sq_{0};
  bool record_trajectories_{false};
  std::vector<std::vector<Vertex>> trajectories_;

  // scratch for step(), sized N
  std::vector<std::int64_t> best_car_;
  std::vector<double> best_key_;
  std::vector<Vertex> touched_;
};

/// Low-level mutation hooks used by the independent reference stepper.
struct StateMutator {
  static void set_position(SimState& s, std::uint32_t car, Vertex v);
  static void add_visit(SimState& s, Vertex v) { s.add_visit(v); }
  static void park(SimState& s, std::uint32_t car, Vertex spot, std::uint64_t t) {
    s.park(car, spot, t);
  }
  static void finish_step(SimState& s);
};

/// One synchronous update: every unparked car moves using its WALK stream at
/// time t+1, then each vacant spot with arrivals is taken by the arrival with
/// the smallest TIE draw (smaller origin on exact equality).
void step(SimState& state, const RandomnessSource& source,
          IterationOrder order = IterationOrder::Forward);

struct VisitIdentity {
  std::uint64_t total_visits;
  std::uint64_t total_moves;
  bool holds() const noexcept { return total_visits == total_moves; }
};

/// sum_v V_t(v) against sum_c min(park_time_c, t), recomputed from scratch.
VisitIdentity visit_identity_check(const SimState& state);

struct ConservationCheck {
  bool parked_equals_occupied;
  bool balance_preserved;
  bool vacant_equals_unvisited;
  bool counters_consistent;
  bool ok() const noexcept {
    return parked_equals_occupied && balance_preserved && vacant_equals_unvisited &&
           counters_consistent;
  }
};

/// Recounts from the per-vertex and per-car arrays rather than cached counters.
ConservationCheck conservation_check(const SimState& state);

struct VertexSnapshot {
  Role role;
  SpotStatus spot_status;
  std::uint64_t occupied_at;  // kNever unless Occupied
  std::uint32_t unparked_count;
};

struct Snapshot {
  std::uint64_t time{0};
  std::vector<VertexSnapshot> vertices;
};

Snapshot snapshot(const SimState& state);

std::string spot_status_label(const VertexSnapshot& v);

}  // namespace parking
