#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace parking {

using Vertex = std::uint32_t;

enum class Family : std::uint8_t {
  UnorientedTorus,
  OrientedTorus,
  Path1D,
  Cycle1D,
  OrientedCycle1D,
};

enum class Boundary : std::uint8_t { Periodic, Reflecting };

std::string_view to_string(Family family);
std::string_view to_string(Boundary boundary);
Family family_from_string(std::string_view name);
Boundary boundary_from_string(std::string_view name);

struct TopologySpec {
  Family family{Family::Cycle1D};
  std::uint32_t dimension{1};  // tori only; 1D families force 1
  std::uint32_t side{3};
  Boundary boundary{Boundary::Reflecting};  // Path1D only

  bool operator==(const TopologySpec&) const = default;
};

struct Neighbor {
  Vertex vertex;
  double weight;
};

struct KernelStats {
  std::uint32_t max_degree;
  double k_min;
  bool in_sums_ok;
};

/// Finite graph with a Markov kernel. Out-neighbors follow the canonical
/// offset order (-e_1, +e_1, -e_2, +e_2, ...) restricted to offsets with
/// nonzero weight. Distances and balls use the undirected graph.
class Topology {
 public:
  explicit Topology(const TopologySpec& spec);

  const TopologySpec& spec() const noexcept { return spec_; }
  std::uint32_t vertex_count() const noexcept { return n_; }
  std::uint32_t dimension() const noexcept { return spec_.dimension; }
  std::uint32_t side() const noexcept { return spec_.side; }
  bool periodic() const noexcept;

  std::span<const Neighbor> neighbors(Vertex v) const;
  /// Prefix sums of the out-weights of v, in neighbor order.
  std::span<const double> cumulative_weights(Vertex v) const;
  /// Undirected adjacency (orientation ignored), canonical order.
  std::span<const Vertex> adjacent(Vertex v) const;

  /// Walk step: first neighbor whose cumulative weight exceeds u.
  Vertex sample_neighbor(Vertex v, double u) const noexcept;

  std::vector<std::uint32_t> coordinates(Vertex v) const;
  Vertex vertex_at(std::span<const std::uint32_t> coords) const;

  std::uint32_t distance(Vertex u, Vertex v) const;
  /// Breadth-first search over the undirected graph; ascending vertex order.
  std::vector<Vertex> ball(Vertex v, std::uint32_t radius) const;

  KernelStats kernel_stats() const;
  /// Max |sum_y K(y,v) - 1| over all vertices.
  double max_in_sum_deviation() const;

 private:
  void check_vertex(Vertex v) const;

  TopologySpec spec_;
  std::uint32_t n_{0};
  std::vector<std::uint32_t> out_offsets_;
  std::vector<Neighbor> out_;
  std::vector<double> cumulative_;
  std::vector<std::uint32_t> adj_offsets_;
  std::vector<Vertex> adj_;
};

Topology build_topology(const TopologySpec& spec);

}  // namespace parking
