#include <doctest.h>

#include <cmath>
#include <memory>

#include "parking/engine.hpp"

using namespace parking;

namespace {

VertexSnapshot empty_site() { return {Role::Car, SpotStatus::NotASpot, kNever, 0}; }
VertexSnapshot vacant() { return {Role::Spot, SpotStatus::Vacant, kNever, 0}; }
VertexSnapshot active_car() { return {Role::Car, SpotStatus::NotASpot, kNever, 1}; }

}  // namespace

TEST_CASE("one vacant spot and no cars: every empty site is closer to the spot") {
  const auto t = build_topology({Family::Cycle1D, 1, 9, Boundary::Periodic});
  Snapshot snap{0, std::vector<VertexSnapshot>(9, empty_site())};
  snap.vertices[4] = vacant();
  const auto m = nearest_type_classify(t, snap);
  for (Vertex v = 0; v < 9; ++v) {
    CHECK(m.labels[v] == (v == 4 ? NearestLabel::NonEmpty : NearestLabel::CloserToSpot));
  }
  CHECK(m.frac_closer_spot == doctest::Approx(8.0 / 9));
  CHECK_FALSE(m.degenerate);
}

TEST_CASE("equidistant car and spot give a tie") {
  const auto t = build_topology({Family::Path1D, 1, 5, Boundary::Reflecting});
  Snapshot snap{0, std::vector<VertexSnapshot>(5, empty_site())};
  snap.vertices[0] = active_car();
  snap.vertices[4] = vacant();
  const auto m = nearest_type_classify(t, snap);
  CHECK(m.labels[1] == NearestLabel::CloserToCar);
  CHECK(m.labels[2] == NearestLabel::Tie);
  CHECK(m.labels[3] == NearestLabel::CloserToSpot);
  CHECK(m.frac_tie == doctest::Approx(0.2));
}

TEST_CASE("no non-empty site labels everything Tie and flags it") {
  const auto t = build_topology({Family::Cycle1D, 1, 6, Boundary::Periodic});
  Snapshot snap{3, std::vector<VertexSnapshot>(6, empty_site())};
  const auto m = nearest_type_classify(t, snap);
  CHECK(m.degenerate);
  for (auto l : m.labels) CHECK(l == NearestLabel::Tie);
}

TEST_CASE("after absorption only spots remain non-empty") {
  const auto t = std::make_shared<const Topology>(TopologySpec{Family::UnorientedTorus, 2, 20, Boundary::Periodic});
  const auto r = run_to_absorption(t, 0.3, 4, 100000, {.keep_final_state = true});
  REQUIRE(r.absorbed());
  const auto m = nearest_type_classify(*t, snapshot(*r.series.final_state));
  for (auto l : m.labels) CHECK(l != NearestLabel::CloserToCar);
}

TEST_CASE("nearest-type labels commute with torus translations") {
  const auto t = std::make_shared<const Topology>(TopologySpec{Family::UnorientedTorus, 2, 12, Boundary::Periodic});
  const auto series = run(t, 0.5, 9, 10, {.keep_final_state = true});
  const auto snap = snapshot(*series.final_state);
  const auto shift = [&](Vertex v) {
    auto x = t->coordinates(v);
    x[0] = (x[0] + 5) % 12;
    x[1] = (x[1] + 3) % 12;
    return t->vertex_at(x);
  };
  Snapshot moved{snap.time, snap.vertices};
  for (Vertex v = 0; v < t->vertex_count(); ++v) moved.vertices[shift(v)] = snap.vertices[v];
  const auto a = nearest_type_classify(*t, snap), b = nearest_type_classify(*t, moved);
  for (Vertex v = 0; v < t->vertex_count(); ++v) CHECK(b.labels[shift(v)] == a.labels[v]);
}

TEST_CASE("observable rows agree with a recount from the snapshot") {
  const auto t = std::make_shared<const Topology>(TopologySpec{Family::UnorientedTorus, 2, 16, Boundary::Periodic});
  const auto series = run(t, 0.45, 21, 30, {.keep_final_state = true});
  const auto& s = *series.final_state;
  const auto row = observables_row(s, true);
  const auto snap = snapshot(s);
  std::uint32_t unparked = 0, vacant_count = 0, unvisited = 0;
  double sum = 0, sum_sq = 0;
  for (Vertex v = 0; v < s.vertex_count(); ++v) {
    unparked += snap.vertices[v].unparked_count;
    vacant_count += snap.vertices[v].spot_status == SpotStatus::Vacant;
    unvisited += s.role(v) == Role::Spot && s.visits(v) == 0;
    sum += s.visits(v);
    sum_sq += static_cast<double>(s.visits(v)) * s.visits(v);
  }
  CHECK(row.unparked_cars == unparked);
  CHECK(row.vacant_spots == vacant_count);
  CHECK(row.frac_spot_unvisited == doctest::Approx(static_cast<double>(unvisited) / s.vertex_count()));
  CHECK(row.vbar == doctest::Approx(sum / s.vertex_count()));
  CHECK(row.vbar_sq == doctest::Approx(sum_sq / s.vertex_count()));
  const auto m = nearest_type_classify(*t, snap);
  CHECK(row.frac_tie == m.frac_tie);
  CHECK(row.frac_closer_car == m.frac_closer_car);
  CHECK(row.frac_closer_spot == m.frac_closer_spot);
  CHECK(std::isnan(observables_row(s, false).frac_tie));
}
