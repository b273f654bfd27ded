#include "parking/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace parking {

std::string_view to_string(Family family) {
  switch (family) {
    case Family::UnorientedTorus: return "unoriented_torus";
    case Family::OrientedTorus: return "oriented_torus";
    case Family::Path1D: return "path";
    case Family::Cycle1D: return "cycle";
    case Family::OrientedCycle1D: return "oriented_cycle";
  }
  return "unknown";
}

std::string_view to_string(Boundary boundary) {
  return boundary == Boundary::Periodic ? "periodic" : "reflecting";
}

Family family_from_string(std::string_view name) {
  for (auto f : {Family::UnorientedTorus, Family::OrientedTorus, Family::Path1D,
                 Family::Cycle1D, Family::OrientedCycle1D}) {
    if (to_string(f) == name) return f;
  }
  throw std::invalid_argument("unknown topology family: " + std::string(name));
}

Boundary boundary_from_string(std::string_view name) {
  if (name == "periodic") return Boundary::Periodic;
  if (name == "reflecting") return Boundary::Reflecting;
  throw std::invalid_argument("unknown boundary: " + std::string(name));
}

namespace {

bool is_torus(Family f) {
  return f == Family::UnorientedTorus || f == Family::OrientedTorus;
}

TopologySpec normalized(TopologySpec spec) {
  if (spec.dimension == 0) throw std::invalid_argument("topology dimension must be >= 1");
  if (!is_torus(spec.family)) spec.dimension = 1;
  const bool periodic = spec.family != Family::Path1D || spec.boundary == Boundary::Periodic;
  if (periodic && spec.side < 3)
    throw std::invalid_argument("periodic topologies require side >= 3");
  if (!periodic && spec.side < 2)
    throw std::invalid_argument("reflecting path requires side >= 2");
  long double n = std::pow(static_cast<long double>(spec.side), spec.dimension);
  if (n > static_cast<long double>(std::numeric_limits<Vertex>::max()))
    throw std::invalid_argument("topology too large for 32-bit vertex indices");
  return spec;
}

}  // namespace

bool Topology::periodic() const noexcept {
  return spec_.family != Family::Path1D || spec_.boundary == Boundary::Periodic;
}

Topology::Topology(const TopologySpec& spec) : spec_(normalized(spec)) {
  const std::uint32_t d = spec_.dimension;
  const std::uint32_t L = spec_.side;
  n_ = 1;
  for (std::uint32_t i = 0; i < d; ++i) n_ *= L;

  out_offsets_.reserve(n_ + 1);
  adj_offsets_.reserve(n_ + 1);
  out_offsets_.push_back(0);
  adj_offsets_.push_back(0);

  std::vector<std::uint32_t> stride(d, 1);
  for (std::uint32_t i = 1; i < d; ++i) stride[i] = stride[i - 1] * L;

  auto shift = [&](Vertex v, std::uint32_t axis, int dir) -> Vertex {
    const std::uint32_t x = (v / stride[axis]) % L;
    const std::uint32_t nx = dir < 0 ? (x + L - 1) % L : (x + 1) % L;
    return v - x * stride[axis] + nx * stride[axis];
  };

  for (Vertex v = 0; v < n_; ++v) {
    if (periodic()) {
      for (std::uint32_t axis = 0; axis < d; ++axis) {
        adj_.push_back(shift(v, axis, -1));
        adj_.push_back(shift(v, axis, +1));
      }
    } else {
      if (v > 0) adj_.push_back(v - 1);
      if (v + 1 < L) adj_.push_back(v + 1);
    }
    adj_offsets_.push_back(static_cast<std::uint32_t>(adj_.size()));

    switch (spec_.family) {
      case Family::UnorientedTorus:
      case Family::Cycle1D: {
        const double w = 1.0 / (2.0 * d);
        for (std::uint32_t axis = 0; axis < d; ++axis) {
          out_.push_back({shift(v, axis, -1), w});
          out_.push_back({shift(v, axis, +1), w});
        }
        break;
      }
      case Family::OrientedTorus: {
        const double w = 1.0 / d;
        for (std::uint32_t axis = 0; axis < d; ++axis) out_.push_back({shift(v, axis, -1), w});
        break;
      }
      case Family::OrientedCycle1D:
        out_.push_back({shift(v, 0, -1), 1.0});
        break;
      case Family::Path1D: {
        const auto first = adj_offsets_[v];
        const auto count = adj_offsets_[v + 1] - first;
        const double w = 1.0 / count;
        for (auto i = first; i < first + count; ++i) out_.push_back({adj_[i], w});
        break;
      }
    }
    double acc = 0.0;
    for (auto i = out_offsets_.back(); i < out_.size(); ++i) {
      acc += out_[i].weight;
      cumulative_.push_back(acc);
    }
    out_offsets_.push_back(static_cast<std::uint32_t>(out_.size()));
  }
}

void Topology::check_vertex(Vertex v) const {
  if (v >= n_) throw std::out_of_range("vertex " + std::to_string(v) + " out of range");
}

std::span<const Neighbor> Topology::neighbors(Vertex v) const {
  check_vertex(v);
  return {out_.data() + out_offsets_[v], out_.data() + out_offsets_[v + 1]};
}

std::span<const double> Topology::cumulative_weights(Vertex v) const {
  check_vertex(v);
  return {cumulative_.data() + out_offsets_[v], cumulative_.data() + out_offsets_[v + 1]};
}

std::span<const Vertex> Topology::adjacent(Vertex v) const {
  check_vertex(v);
  return {adj_.data() + adj_offsets_[v], adj_.data() + adj_offsets_[v + 1]};
}

Vertex Topology::sample_neighbor(Vertex v, double u) const noexcept {
  const auto first = out_offsets_[v];
  const auto last = out_offsets_[v + 1] - 1;
  for (auto i = first; i < last; ++i) {
    if (u < cumulative_[i]) return out_[i].vertex;
  }
  return out_[last].vertex;
}

std::vector<std::uint32_t> Topology::coordinates(Vertex v) const {
  check_vertex(v);
  std::vector<std::uint32_t> c(spec_.dimension);
  for (auto& x : c) {
    x = v % spec_.side;
    v /= spec_.side;
  }
  return c;
}

Vertex Topology::vertex_at(std::span<const std::uint32_t> coords) const {
  if (coords.size() != spec_.dimension) throw std::invalid_argument("coordinate rank mismatch");
  Vertex v = 0;
  for (std::size_t i = coords.size(); i-- > 0;) {
    if (coords[i] >= spec_.side) throw std::out_of_range("coordinate out of range");
    v = v * spec_.side + coords[i];
  }
  return v;
}

std::uint32_t Topology::distance(Vertex u, Vertex v) const {
  check_vertex(u);
  check_vertex(v);
  const std::uint32_t L = spec_.side;
  std::uint32_t dist = 0;
  for (std::uint32_t axis = 0; axis < spec_.dimension; ++axis) {
    const std::uint32_t a = u % L, b = v % L;
    u /= L;
    v /= L;
    const std::uint32_t delta = a > b ? a - b : b - a;
    dist += periodic() ? std::min(delta, L - delta) : delta;
  }
  return dist;
}

std::vector<Vertex> Topology::ball(Vertex v, std::uint32_t radius) const {
  check_vertex(v);
  std::vector<std::uint32_t> depth(n_, std::numeric_limits<std::uint32_t>::max());
  std::vector<Vertex> found{v};
  std::deque<Vertex> queue{v};
  depth[v] = 0;
  while (!queue.empty()) {
    const Vertex x = queue.front();
    queue.pop_front();
    if (depth[x] == radius) continue;
    for (Vertex y : adjacent(x)) {
      if (depth[y] != std::numeric_limits<std::uint32_t>::max()) continue;
      depth[y] = depth[x] + 1;
      found.push_back(y);
      queue.push_back(y);
    }
  }
  std::sort(found.begin(), found.end());
  return found;
}

KernelStats Topology::kernel_stats() const {
  KernelStats s{0, 1.0, true};
  for (Vertex v = 0; v < n_; ++v) {
    s.max_degree = std::max<std::uint32_t>(s.max_degree, adj_offsets_[v + 1] - adj_offsets_[v]);
    for (const auto& nb : neighbors(v)) {
      if (nb.weight > 0.0) s.k_min = std::min(s.k_min, nb.weight);
    }
  }
  s.in_sums_ok = max_in_sum_deviation() <= 1e-12;
  return s;
}

double Topology::max_in_sum_deviation() const {
  std::vector<double> in(n_, 0.0);
  for (Vertex v = 0; v < n_; ++v) {
    for (const auto& nb : neighbors(v)) in[nb.vertex] += nb.weight;
  }
  double worst = 0.0;
  for (double s : in) worst = std::max(worst, std::abs(s - 1.0));
  return worst;
}

Topology build_topology(const TopologySpec& spec) { return Topology(spec); }

}  // namespace parking
