#include "parking/state.hpp"

#include <stdexcept>

namespace parking {

InitialConfig sample_initial(const Topology& topology, double p, const RandomnessSource& source) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("car density p must lie in [0,1]");
  InitialConfig config;
  config.p = p;
  config.seed = source.seed();
  config.roles.resize(topology.vertex_count());
  for (Vertex v = 0; v < topology.vertex_count(); ++v) {
    const bool car = source.draw(Purpose::Role, v, 0) < p;
    config.roles[v] = car ? Role::Car : Role::Spot;
    ++(car ? config.n_cars : config.n_spots);
  }
  return config;
}

InitialConfig config_from_roles(std::vector<Role> roles) {
  InitialConfig config;
  config.roles = std::move(roles);
  for (Role r : config.roles) ++(r == Role::Car ? config.n_cars : config.n_spots);
  config.p = config.roles.empty() ? 0.0
                                  : static_cast<double>(config.n_cars) / config.roles.size();
  return config;
}

SimState::SimState(std::shared_ptr<const Topology> topology, const InitialConfig& config,
                   bool record_trajectories)
    : topology_(std::move(topology)), record_trajectories_(record_trajectories) {
  if (!topology_) throw std::invalid_argument("null topology");
  const auto n = topology_->vertex_count();
  if (config.roles.size() != n) throw std::invalid_argument("role vector does not match topology");
  roles_ = config.roles;
  spot_status_.resize(n);
  occupied_at_.assign(n, kNever);
  visits_.assign(n, 0);
  car_index_.assign(n, -1);
  for (Vertex v = 0; v < n; ++v) {
    if (roles_[v] == Role::Car) {
      car_index_[v] = static_cast<std::int64_t>(cars_.size());
      active_.push_back(static_cast<std::uint32_t>(cars_.size()));
      cars_.push_back({v, v, kNever});
      spot_status_[v] = SpotStatus::NotASpot;
    } else {
      spot_status_[v] = SpotStatus::Vacant;
      ++n_spots_;
    }
  }
  n_cars_ = static_cast<std::uint32_t>(cars_.size());
  vacant_ = n_spots_;
  unvisited_spots_ = n_spots_;
  if (record_trajectories_) {
    trajectories_.reserve(cars_.size());
    for (const auto& c : cars_) trajectories_.push_back({c.origin});
  }
  best_car_.assign(n, -1);
  best_key_.assign(n, 0.0);
}

const std::vector<Vertex>& SimState::trajectory(std::uint32_t car) const {
  if (!record_trajectories_) throw std::logic_error("trajectory log was not enabled for this run");
  return trajectories_.at(car);
}

bool SimState::operator==(const SimState& o) const {
  return time_ == o.time_ && roles_ == o.roles_ && spot_status_ == o.spot_status_ &&
         occupied_at_ == o.occupied_at_ && visits_ == o.visits_ && cars_ == o.cars_ &&
         active_ == o.active_ && vacant_ == o.vacant_ && unvisited_spots_ == o.unvisited_spots_ &&
         sum_visits_ == o.sum_visits_ && sum_visits_sq_ == o.sum_visits_sq_ &&
         (!record_trajectories_ || !o.record_trajectories_ || trajectories_ == o.trajectories_);
}

void SimState::add_visit(Vertex v) noexcept {
  const std::uint64_t before = visits_[v]++;
  sum_visits_ += 1;
  sum_visits_sq_ += 2 * before + 1;
  if (before == 0 && roles_[v] == Role::Spot) --unvisited_spots_;
}

void SimState::park(std::uint32_t car, Vertex spot, std::uint64_t t) noexcept {
  cars_[car].park_time = t;
  spot_status_[spot] = SpotStatus::Occupied;
  occupied_at_[spot] = t;
  --vacant_;
}

void StateMutator::set_position(SimState& s, std::uint32_t car, Vertex v) {
  s.cars_[car].position = v;
  if (s.record_trajectories_) s.trajectories_[car].push_back(v);
}

void StateMutator::finish_step(SimState& s) {
  std::erase_if(s.active_, [&](std::uint32_t c) { return s.cars_[c].parked(); });
  ++s.time_;
}

void step(SimState& s, const RandomnessSource& source, IterationOrder order) {
  const std::uint64_t t1 = s.time_ + 1;
  const Topology& topo = *s.topology_;

  auto move = [&](std::uint32_t c) {
    CarRecord& car = s.cars_[c];
    const Vertex dest = topo.sample_neighbor(car.position, source.draw(Purpose::Walk, car.origin, t1));
    car.position = dest;
    if (s.record_trajectories_) s.trajectories_[c].push_back(dest);
    s.add_visit(dest);
    if (s.spot_status_[dest] != SpotStatus::Vacant) return;
    const double key = source.draw(Purpose::Tie, car.origin, t1);
    auto& best = s.best_car_[dest];
    if (best < 0) {
      s.touched_.push_back(dest);
      best = c;
      s.best_key_[dest] = key;
    } else if (key < s.best_key_[dest] ||
               (key == s.best_key_[dest] && car.origin < s.cars_[best].origin)) {
      best = c;
      s.best_key_[dest] = key;
    }
  };

  if (order == IterationOrder::Forward) {
    for (std::uint32_t c : s.active_) move(c);
  } else {
    for (auto it = s.active_.rbegin(); it != s.active_.rend(); ++it) move(*it);
  }

  for (Vertex w : s.touched_) {
    s.park(static_cast<std::uint32_t>(s.best_car_[w]), w, t1);
    s.best_car_[w] = -1;
  }
  if (!s.touched_.empty()) {
    std::erase_if(s.active_, [&](std::uint32_t c) { return s.cars_[c].parked(); });
  }
  s.touched_.clear();
  s.time_ = t1;
}

VisitIdentity visit_identity_check(const SimState& state) {
  VisitIdentity r{0, 0};
  for (auto v : state.visit_counts()) r.total_visits += v;
  for (const auto& c : state.cars()) r.total_moves += c.moves_by(state.time());
  return r;
}

ConservationCheck conservation_check(const SimState& s) {
  std::uint64_t parked = 0, unparked = 0, occupied = 0, vacant = 0, unvisited = 0;
  for (const auto& c : s.cars()) ++(c.parked() ? parked : unparked);
  for (Vertex v = 0; v < s.vertex_count(); ++v) {
    if (s.spot_status(v) == SpotStatus::Occupied) ++occupied;
    if (s.spot_status(v) == SpotStatus::Vacant) ++vacant;
    if (s.role(v) == Role::Spot && s.visits(v) == 0) ++unvisited;
  }
  const auto n_cars = static_cast<std::int64_t>(s.n_cars());
  const auto n_spots = static_cast<std::int64_t>(s.n_spots());
  ConservationCheck r{};
  r.parked_equals_occupied = parked == occupied;
  r.balance_preserved = static_cast<std::int64_t>(unparked) - static_cast<std::int64_t>(vacant) ==
                        n_cars - n_spots;
  r.vacant_equals_unvisited = vacant == unvisited;
  r.counters_consistent = parked == s.parked_cars() && unparked == s.unparked_cars() &&
                          vacant == s.vacant_spots() && occupied == s.occupied_spots() &&
                          unvisited == s.unvisited_spots();
  return r;
}

Snapshot snapshot(const SimState& s) {
  Snapshot snap;
  snap.time = s.time();
  snap.vertices.resize(s.vertex_count());
  for (Vertex v = 0; v < s.vertex_count(); ++v) {
    snap.vertices[v] = {s.role(v), s.spot_status(v), s.occupied_at(v), 0};
  }
  for (auto c : s.unparked_indices()) ++snap.vertices[s.cars()[c].position].unparked_count;
  return snap;
}

std::string spot_status_label(const VertexSnapshot& v) {
  switch (v.spot_status) {
    case SpotStatus::NotASpot: return "not_a_spot";
    case SpotStatus::Vacant: return "vacant";
    case SpotStatus::Occupied: return "occupied:" + std::to_string(v.occupied_at);
  }
  return "unknown";
}

}  // namespace parking
