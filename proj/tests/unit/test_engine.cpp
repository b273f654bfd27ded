#include <doctest.h>

#include <memory>

#include "parking/engine.hpp"
#include "parking/oracles.hpp"

using namespace parking;

namespace {

std::shared_ptr<const Topology> topo(Family f, std::uint32_t d, std::uint32_t L,
                                     Boundary b = Boundary::Periodic) {
  return std::make_shared<const Topology>(TopologySpec{f, d, L, b});
}

constexpr Role C = Role::Car;
constexpr Role S = Role::Spot;

}  // namespace

TEST_CASE("initial sampling") {
  const auto t = topo(Family::UnorientedTorus, 2, 20);
  const RandomnessSource src(11);
  const auto none = sample_initial(*t, 0.0, src);
  CHECK(none.n_cars == 0);
  CHECK(none.n_spots == 400);
  const auto all = sample_initial(*t, 1.0, src);
  CHECK(all.n_spots == 0);
  const auto lo = sample_initial(*t, 0.3, src), hi = sample_initial(*t, 0.5, src);
  for (Vertex v = 0; v < 400; ++v) {
    if (lo.roles[v] == Role::Car) CHECK(hi.roles[v] == Role::Car);
  }
  CHECK(lo.n_cars < hi.n_cars);
  CHECK_THROWS_AS(sample_initial(*t, 1.5, src), std::invalid_argument);
}

TEST_CASE("hand trace on the oriented cycle of size 3") {
  const auto t = topo(Family::OrientedCycle1D, 1, 3);
  const RandomnessSource src(1);
  SimState s(t, config_from_roles({C, C, S}), true);
  CHECK(s.unparked_cars() - static_cast<int>(s.vacant_spots()) == 1);

  step(s, src);
  CHECK(s.cars()[0].park_time == 1);
  CHECK(s.cars()[0].position == 2);
  CHECK(s.cars()[1].position == 0);
  CHECK_FALSE(s.cars()[1].parked());
  CHECK(s.visits(0) == 1);
  CHECK(s.visits(2) == 1);
  CHECK(s.spot_status(2) == SpotStatus::Occupied);
  CHECK(s.occupied_at(2) == 1);

  step(s, src);
  CHECK(s.cars()[1].position == 2);
  CHECK_FALSE(s.cars()[1].parked());
  CHECK(s.visits(2) == 2);
  CHECK(s.visits(0) == 1);
  CHECK(s.total_visits() == 3);
  const auto id = visit_identity_check(s);
  CHECK(id.total_visits == 3);
  CHECK(id.total_moves == 3);
  const auto row = observables_row(s);
  CHECK(row.vbar == 1.0);
  CHECK(row.vacant_spots == 0);
  CHECK(s.trajectory(1) == std::vector<Vertex>{1, 0, 2});
  CHECK(s.trajectory(0) == std::vector<Vertex>{0, 2});

  for (int i = 0; i < 20; ++i) {
    step(s, src);
    CHECK(s.unparked_cars() == 1);
    CHECK(static_cast<int>(s.unparked_cars()) - static_cast<int>(s.vacant_spots()) == 1);
  }
}

TEST_CASE("two cars arriving at one vacant spot: exactly one parks") {
  const auto t = topo(Family::Path1D, 1, 3, Boundary::Reflecting);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const RandomnessSource src(seed);
    SimState s(t, config_from_roles({C, S, C}));
    step(s, src);
    CHECK(s.parked_cars() == 1);
    CHECK(s.unparked_cars() == 1);
    const auto& loser = s.cars()[s.unparked_indices()[0]];
    CHECK(loser.position == 1);
    CHECK(s.visits(1) == 2);
    // The smaller TIE draw wins.
    const double d0 = src.draw(Purpose::Tie, 0, 1), d2 = src.draw(Purpose::Tie, 2, 1);
    CHECK(loser.origin == (d0 < d2 ? 2u : 0u));
  }
}

TEST_CASE("p = 1 gives Vbar_t = t and p = 0 gives zeros") {
  for (auto t : {topo(Family::UnorientedTorus, 2, 8), topo(Family::OrientedCycle1D, 1, 9),
                 topo(Family::Path1D, 1, 7, Boundary::Reflecting)}) {
    const auto full = run(t, 1.0, 3, 25);
    for (const auto& r : full.rows) {
      CHECK(r.vbar == static_cast<double>(r.t));
      CHECK(r.frac_spot_unvisited == 0.0);
    }
    const auto empty = run(t, 0.0, 3, 25);
    for (const auto& r : empty.rows) {
      CHECK(r.vbar == 0.0);
      CHECK(r.frac_spot_unvisited == 1.0);
    }
    CHECK(empty.absorption_time == 0u);
  }
}

TEST_CASE("absorption") {
  const auto path = topo(Family::Path1D, 1, 2, Boundary::Reflecting);
  const RandomnessSource src(5);
  auto series = run_state(SimState(path, config_from_roles({C, S})), src, 100, {}, true);
  CHECK(series.absorption_time == 1u);
  const auto cyc = topo(Family::Cycle1D, 1, 3);
  series = run_state(SimState(cyc, config_from_roles({C, S, S})), src, 100, {}, true);
  CHECK(series.absorption_time == 1u);
  CHECK(run_to_absorption(cyc, 0.0, 1, 10).absorption_time == 0u);

  const auto torus = topo(Family::UnorientedTorus, 2, 30);
  const auto r = run_to_absorption(torus, 0.3, 17, 1000000, {.keep_final_state = true});
  REQUIRE(r.absorbed());
  CHECK(r.series.parked_cars == r.series.n_cars);
  CHECK(r.series.final_state->occupied_spots() == r.series.n_cars);
}

TEST_CASE("conservation and visit identity on random runs") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto t = seed % 2 ? topo(Family::UnorientedTorus, 2, 15) : topo(Family::Cycle1D, 1, 60);
    const RandomnessSource src(seed);
    SimState s(t, sample_initial(*t, 0.2 + 0.06 * seed, src));
    for (int i = 0; i < 60; ++i) {
      step(s, src);
      REQUIRE(conservation_check(s).ok());
      REQUIRE(visit_identity_check(s).holds());
    }
  }
}

TEST_CASE("after saturation the visit sum grows by N_cars - N_spots per step") {
  const auto t = topo(Family::UnorientedTorus, 2, 40);
  const auto series = run(t, 0.6, 8, 800);
  REQUIRE(series.saturation_time.has_value());
  const double excess = static_cast<double>(series.n_cars) - series.n_spots;
  const double n = series.n_vertices;
  for (std::size_t i = *series.saturation_time; i + 1 < series.rows.size(); ++i) {
    const double inc = (series.rows[i + 1].vbar - series.rows[i].vbar) * n;
    REQUIRE(std::round(inc) == excess);
  }
}

TEST_CASE("engine matches the reference stepper, in both orders") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto t = seed % 3 == 0   ? topo(Family::UnorientedTorus, 2, 9)
                   : seed % 3 == 1 ? topo(Family::OrientedTorus, 2, 9)
                                   : topo(Family::Path1D, 1, 40, Boundary::Reflecting);
    const RandomnessSource src(seed);
    const auto init = sample_initial(*t, 0.45, src);
    SimState a(t, init, true), b(t, init, true), c(t, init, true);
    for (int i = 0; i < 50; ++i) {
      step(a, src);
      oracles::reference_step(b, src);
      step(c, src, IterationOrder::Reversed);
      REQUIRE(a == b);
      REQUIRE(a == c);
    }
  }
}

TEST_CASE("runs are deterministic") {
  const auto t = topo(Family::UnorientedTorus, 2, 25);
  const auto a = run(t, 0.5, 77, 60, {.track_nearest = true});
  const auto b = run(t, 0.5, 77, 60, {.track_nearest = true});
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].vbar == b.rows[i].vbar);
    CHECK(a.rows[i].frac_tie == b.rows[i].frac_tie);
  }
}

TEST_CASE("coupling") {
  const auto t = topo(Family::Cycle1D, 1, 200);
  const auto same = couple_run(t, 0.4, 0.4, 3, 100);
  CHECK(same.ok());
  CHECK(same.identical_trajectories);
  const auto zero = couple_run(t, 0.0, 0.6, 3, 100);
  CHECK(zero.ok());
  CHECK(zero.cars_compared == 0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = couple_run(t, 0.3, 0.5, seed, 200);
    CHECK(r.violation_count == 0);
    CHECK(r.cars_compared > 0);
  }
  CHECK_THROWS_AS(couple_run(t, 0.6, 0.5, 1, 10), std::invalid_argument);
}

TEST_CASE("budgets") {
  const auto t = topo(Family::UnorientedTorus, 2, 50);
  CHECK_THROWS_AS(run(t, 0.5, 1, 1000, {.work_budget = 1e5}), BudgetExceeded);
  CHECK_THROWS_AS(run(t, 0.5, 1, 1000, {.record_trajectories = true, .trajectory_budget = 10}),
                  BudgetExceeded);
}

TEST_CASE("snapshots at requested times") {
  const auto t = topo(Family::UnorientedTorus, 2, 10);
  const auto s = run(t, 0.5, 2, 20, {.snapshot_times = {15, 0, 5}});
  REQUIRE(s.snapshots.size() == 3);
  CHECK(s.snapshots[0].time == 0);
  CHECK(s.snapshots[2].time == 15);
  std::uint32_t unparked = 0;
  for (const auto& v : s.snapshots[2].vertices) unparked += v.unparked_count;
  CHECK(unparked == s.rows[15].unparked_cars);
}
