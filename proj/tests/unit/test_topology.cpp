#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "parking/topology.hpp"

using namespace parking;

namespace {

Topology make(Family f, std::uint32_t d, std::uint32_t L, Boundary b = Boundary::Periodic) {
  return build_topology({f, d, L, b});
}

}  // namespace

TEST_CASE("unoriented 3x3 torus has four neighbors of weight 1/4") {
  const auto t = make(Family::UnorientedTorus, 2, 3);
  CHECK(t.vertex_count() == 9);
  for (Vertex v = 0; v < 9; ++v) {
    const auto nb = t.neighbors(v);
    REQUIRE(nb.size() == 4);
    for (const auto& n : nb) CHECK(n.weight == 0.25);
  }
}

TEST_CASE("oriented torus steps along -e1 and -e2 only") {
  const auto t = make(Family::OrientedTorus, 2, 5);
  for (Vertex v = 0; v < t.vertex_count(); ++v) {
    const auto nb = t.neighbors(v);
    REQUIRE(nb.size() == 2);
    const auto x = t.coordinates(v);
    std::vector<std::uint32_t> a{(x[0] + 4) % 5, x[1]}, b{x[0], (x[1] + 4) % 5};
    CHECK(nb[0].vertex == t.vertex_at(a));
    CHECK(nb[1].vertex == t.vertex_at(b));
    CHECK(nb[0].weight == 0.5);
    CHECK(nb[1].weight == 0.5);
  }
}

TEST_CASE("oriented cycle moves right to left") {
  const auto t = make(Family::OrientedCycle1D, 1, 4);
  for (Vertex v = 0; v < 4; ++v) {
    const auto nb = t.neighbors(v);
    REQUIRE(nb.size() == 1);
    CHECK(nb[0].vertex == (v + 3) % 4);
    CHECK(nb[0].weight == 1.0);
  }
  const auto t5 = make(Family::OrientedCycle1D, 1, 5);
  CHECK(t5.neighbors(0)[0].vertex == 4);
}

TEST_CASE("neighbor lists of small examples") {
  const auto cyc = make(Family::UnorientedTorus, 1, 5);
  const auto nb = cyc.neighbors(0);
  REQUIRE(nb.size() == 2);
  CHECK(nb[0].vertex == 4);
  CHECK(nb[0].weight == 0.5);
  CHECK(nb[1].vertex == 1);
  CHECK(nb[1].weight == 0.5);

  const auto path = make(Family::Path1D, 1, 3, Boundary::Reflecting);
  REQUIRE(path.neighbors(0).size() == 1);
  CHECK(path.neighbors(0)[0].vertex == 1);
  CHECK(path.neighbors(0)[0].weight == 1.0);
  CHECK(path.neighbors(1).size() == 2);
  CHECK(path.neighbors(2)[0].vertex == 1);
}

TEST_CASE("distance uses the undirected periodic metric") {
  const auto t = make(Family::UnorientedTorus, 2, 10);
  std::vector<std::uint32_t> o{0, 0}, c{9, 9};
  CHECK(t.distance(t.vertex_at(o), t.vertex_at(c)) == 2);
  CHECK(t.distance(7, 7) == 0);
  const auto oc = make(Family::OrientedCycle1D, 1, 10);
  CHECK(oc.distance(0, 9) == 1);
  CHECK(oc.distance(9, 0) == 1);
  const auto path = make(Family::Path1D, 1, 10, Boundary::Reflecting);
  CHECK(path.distance(0, 9) == 9);
}

TEST_CASE("balls") {
  const auto t = make(Family::UnorientedTorus, 2, 7);
  CHECK(t.ball(10, 0) == std::vector<Vertex>{10});
  CHECK(t.ball(10, 1).size() == 5);
  CHECK(t.ball(10, 2).size() == 13);
  const auto cyc = make(Family::Cycle1D, 1, 10);
  CHECK(cyc.ball(0, 2) == std::vector<Vertex>{0, 1, 2, 8, 9});
  const auto oriented = make(Family::OrientedTorus, 2, 7);
  CHECK(oriented.ball(10, 1).size() == 5);
}

TEST_CASE("kernel stats") {
  const auto un = make(Family::UnorientedTorus, 2, 6).kernel_stats();
  CHECK(un.max_degree == 4);
  CHECK(un.k_min == 0.25);
  CHECK(un.in_sums_ok);
  const auto ori = make(Family::OrientedTorus, 2, 6).kernel_stats();
  CHECK(ori.max_degree == 4);
  CHECK(ori.k_min == 0.5);
  CHECK(ori.in_sums_ok);
  const auto path = make(Family::Path1D, 1, 6, Boundary::Reflecting);
  CHECK_FALSE(path.kernel_stats().in_sums_ok);
  CHECK(path.max_in_sum_deviation() > 0.4);
}

TEST_CASE("out-weights sum to one and sample_neighbor follows them") {
  for (auto spec : {TopologySpec{Family::UnorientedTorus, 3, 4, Boundary::Periodic},
                    TopologySpec{Family::OrientedTorus, 3, 4, Boundary::Periodic},
                    TopologySpec{Family::Path1D, 1, 5, Boundary::Reflecting},
                    TopologySpec{Family::Path1D, 1, 5, Boundary::Periodic},
                    TopologySpec{Family::Cycle1D, 1, 5, Boundary::Periodic}}) {
    const auto t = build_topology(spec);
    for (Vertex v = 0; v < t.vertex_count(); ++v) {
      double sum = 0;
      for (const auto& n : t.neighbors(v)) sum += n.weight;
      // Exact for power-of-two degrees, within an ulp or so otherwise (1/3 + 1/3 + 1/3).
      const auto deg = t.neighbors(v).size();
      if ((deg & (deg - 1)) != 0) {
        CHECK(std::abs(sum - 1.0) < 1e-15);
      } else {
        CHECK(sum == 1.0);
      }
      const auto nb = t.neighbors(v);
      CHECK(t.sample_neighbor(v, 0.0) == nb.front().vertex);
      CHECK(t.sample_neighbor(v, 0.999999) == nb.back().vertex);
    }
  }
}

TEST_CASE("coordinates round-trip") {
  const auto t = make(Family::UnorientedTorus, 3, 5);
  for (Vertex v = 0; v < t.vertex_count(); ++v) CHECK(t.vertex_at(t.coordinates(v)) == v);
  CHECK_THROWS_AS(t.neighbors(t.vertex_count()), std::out_of_range);
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS(make(Family::UnorientedTorus, 0, 5), std::invalid_argument);
  CHECK_THROWS_AS(make(Family::UnorientedTorus, 2, 2), std::invalid_argument);
  CHECK_THROWS_AS(make(Family::Path1D, 1, 1, Boundary::Reflecting), std::invalid_argument);
  CHECK_NOTHROW(make(Family::Path1D, 1, 2, Boundary::Reflecting));
  CHECK_THROWS_AS(family_from_string("moebius"), std::invalid_argument);
  CHECK(family_from_string("oriented_torus") == Family::OrientedTorus);
  CHECK(to_string(Family::Cycle1D) == "cycle");
}
