#include "parking/observables.hpp"

#include <deque>
#include <limits>

namespace parking {

std::string_view to_string(NearestLabel label) {
  switch (label) {
    case NearestLabel::CloserToCar: return "closer_car";
    case NearestLabel::CloserToSpot: return "closer_spot";
    case NearestLabel::Tie: return "tie";
    case NearestLabel::NonEmpty: return "non_empty";
  }
  return "unknown";
}

namespace {

constexpr std::uint32_t kFar = std::numeric_limits<std::uint32_t>::max();

std::vector<std::uint32_t> multi_source_bfs(const Topology& topology,
                                            const std::vector<Vertex>& sources) {
  std::vector<std::uint32_t> dist(topology.vertex_count(), kFar);
  std::deque<Vertex> queue;
  for (Vertex s : sources) {
    dist[s] = 0;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    const Vertex x = queue.front();
    queue.pop_front();
    for (Vertex y : topology.adjacent(x)) {
      if (dist[y] != kFar) continue;
      dist[y] = dist[x] + 1;
      queue.push_back(y);
    }
  }
  return dist;
}

}  // namespace

NearestTypeMap nearest_type_classify(const Topology& topology, const Snapshot& snap) {
  const auto n = topology.vertex_count();
  std::vector<Vertex> car_sites, spot_sites;
  for (Vertex v = 0; v < n; ++v) {
    const auto& s = snap.vertices[v];
    if (s.unparked_count > 0) car_sites.push_back(v);
    if (s.spot_status == SpotStatus::Vacant) spot_sites.push_back(v);
  }

  NearestTypeMap map;
  map.labels.assign(n, NearestLabel::Tie);
  if (car_sites.empty() && spot_sites.empty()) {
    map.degenerate = true;
    map.frac_tie = n ? 1.0 : 0.0;
    return map;
  }

  const auto to_car = multi_source_bfs(topology, car_sites);
  const auto to_spot = multi_source_bfs(topology, spot_sites);
  std::uint64_t closer_car = 0, closer_spot = 0, tie = 0;
  for (Vertex v = 0; v < n; ++v) {
    auto& label = map.labels[v];
    if (to_car[v] == 0 || to_spot[v] == 0) {
      label = NearestLabel::NonEmpty;
    } else if (to_car[v] < to_spot[v]) {
      label = NearestLabel::CloserToCar;
      ++closer_car;
    } else if (to_spot[v] < to_car[v]) {
      label = NearestLabel::CloserToSpot;
      ++closer_spot;
    } else {
      label = NearestLabel::Tie;
      ++tie;
    }
  }
  map.frac_closer_car = static_cast<double>(closer_car) / n;
  map.frac_closer_spot = static_cast<double>(closer_spot) / n;
  map.frac_tie = static_cast<double>(tie) / n;
  return map;
}

ObservableRow observables_row(const SimState& state, bool with_nearest) {
  const double n = state.vertex_count();
  ObservableRow row;
  row.t = state.time();
  row.vbar = static_cast<double>(state.total_visits()) / n;
  row.vbar_sq = static_cast<double>(state.total_visits_sq()) / n;
  row.unparked_cars = state.unparked_cars();
  row.vacant_spots = state.vacant_spots();
  row.frac_spot_unvisited = static_cast<double>(state.unvisited_spots()) / n;
  if (with_nearest) {
    const auto map = nearest_type_classify(state.topology(), snapshot(state));
    row.frac_closer_spot = map.frac_closer_spot;
    row.frac_closer_car = map.frac_closer_car;
    row.frac_tie = map.frac_tie;
  } else {
    row.frac_closer_spot = row.frac_closer_car = row.frac_tie =
        std::numeric_limits<double>::quiet_NaN();
  }
  return row;
}

}  // namespace parking
