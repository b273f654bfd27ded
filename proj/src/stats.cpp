#include "parking/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "parking/parallel.hpp"

namespace parking::stats {

MeanEstimate estimate_mean(std::span<const double> values) {
  MeanEstimate e;
  e.n = values.size();
  if (values.empty()) return e;
  double sum = 0;
  for (double v : values) sum += v;
  e.mean = sum / e.n;
  if (e.n > 1) {
    double ss = 0;
    for (double v : values) ss += (v - e.mean) * (v - e.mean);
    e.standard_error = std::sqrt(ss / (e.n - 1) / e.n);
  }
  return e;
}

bool ResidualPoint::within(double k) const noexcept {
  return std::abs(mean) <= k * standard_error;
}

double RecursionResidual::fraction_within(double k) const {
  if (points.empty()) return 0.0;
  const auto hits = std::count_if(points.begin(), points.end(),
                                  [k](const ResidualPoint& r) { return r.within(k); });
  return static_cast<double>(hits) / points.size();
}

bool RecursionResidual::exactly_zero() const {
  return std::all_of(points.begin(), points.end(),
                     [](const ResidualPoint& r) { return r.mean == 0.0 && r.standard_error == 0.0; });
}

RecursionResidual recursion_residual(std::span<const SimSeries> ensemble, double p) {
  if (ensemble.size() < 2) throw std::invalid_argument("recursion_residual needs >= 2 replicas");
  std::size_t len = ensemble.front().rows.size();
  for (const auto& s : ensemble) len = std::min(len, s.rows.size());
  RecursionResidual out;
  std::vector<double> values(ensemble.size());
  for (std::size_t i = 0; i + 1 < len; ++i) {
    for (std::size_t r = 0; r < ensemble.size(); ++r) {
      const auto& rows = ensemble[r].rows;
      values[r] = (rows[i + 1].vbar - rows[i].vbar) - (2.0 * p - 1.0) - rows[i].frac_spot_unvisited;
    }
    const auto est = estimate_mean(values);
    out.points.push_back({ensemble.front().rows[i].t, est.mean, est.standard_error});
  }
  return out;
}

namespace {

ParkProbabilities park_probs(std::uint32_t n_cars, std::uint32_t n_spots, std::uint32_t parked,
                             std::uint32_t occupied) {
  ParkProbabilities r;
  r.n_cars = n_cars;
  r.n_spots = n_spots;
  r.parked_cars = parked;
  r.occupied_spots = occupied;
  if (n_cars > 0) {
    const double f = static_cast<double>(parked) / n_cars;
    r.frac_cars_parked = f;
    r.se_cars = std::sqrt(f * (1 - f) / n_cars);
  }
  if (n_spots > 0) {
    const double f = static_cast<double>(occupied) / n_spots;
    r.frac_spots_parked_in = f;
    r.se_spots = std::sqrt(f * (1 - f) / n_spots);
  }
  r.duality_holds = parked == occupied;
  return r;
}

}  // namespace

ParkProbabilities empirical_park_probs(const SimState& state) {
  return park_probs(state.n_cars(), state.n_spots(), state.parked_cars(), state.occupied_spots());
}

ParkProbabilities empirical_park_probs(const SimSeries& series) {
  const std::uint32_t vacant = series.rows.empty() ? series.n_spots : series.rows.back().vacant_spots;
  return park_probs(series.n_cars, series.n_spots, series.parked_cars, series.n_spots - vacant);
}

bool ConditionalNoVisit::ordered_within(double k) const {
  auto le = [k](const MeanEstimate& a, const MeanEstimate& b) {
    return a.mean <= b.mean + k * std::hypot(a.standard_error, b.standard_error);
  };
  bool ok = true;
  if (given_car) ok = ok && le(*given_car, unconditional);
  if (given_spot) ok = ok && le(unconditional, *given_spot);
  return ok;
}

ConditionalNoVisit conditional_no_visit(std::span<const SimState> states) {
  std::uint64_t car_total = 0, car_zero = 0, spot_total = 0, spot_zero = 0;
  for (const auto& s : states) {
    for (Vertex v = 0; v < s.vertex_count(); ++v) {
      const bool zero = s.visits(v) == 0;
      if (s.role(v) == Role::Car) {
        ++car_total;
        car_zero += zero;
      } else {
        ++spot_total;
        spot_zero += zero;
      }
    }
  }
  auto proportion = [](std::uint64_t hits, std::uint64_t total) {
    const double f = static_cast<double>(hits) / total;
    return MeanEstimate{f, std::sqrt(f * (1 - f) / total), total};
  };
  ConditionalNoVisit out;
  const auto total = car_total + spot_total;
  if (total > 0) out.unconditional = proportion(car_zero + spot_zero, total);
  if (car_total > 0) out.given_car = proportion(car_zero, car_total);
  if (spot_total > 0) out.given_spot = proportion(spot_zero, spot_total);
  return out;
}

Window default_window(const TopologySpec& spec) {
  const bool oriented =
      spec.family == Family::OrientedTorus || spec.family == Family::OrientedCycle1D;
  const std::uint64_t L = spec.side;
  return oriented ? Window{L / 2, L} : Window{2 * L, 4 * L};
}

namespace {

PowerLawFit least_squares(const std::vector<double>& x, const std::vector<double>& y, Window w) {
  if (x.size() < 3) throw std::invalid_argument("fit needs at least three usable points in the window");
  const double n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  PowerLawFit fit;
  fit.window = w;
  fit.points = x.size();
  fit.slope = sxx == 0.0 ? 0.0 : sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    fit.rss += r * r;
  }
  return fit;
}

void check_window(Window w) {
  if (w.t_lo >= w.t_hi) throw std::invalid_argument("fit window must satisfy t_lo < t_hi");
}

}  // namespace

PowerLawFit fit_power_law(std::span<const ObservableRow> rows, Window window) {
  check_window(window);
  std::vector<double> x, y;
  for (const auto& r : rows) {
    if (r.t < window.t_lo || r.t > window.t_hi || r.t == 0 || !(r.vbar > 0.0)) continue;
    x.push_back(std::log(static_cast<double>(r.t)));
    y.push_back(std::log(r.vbar));
  }
  return least_squares(x, y, window);
}

PowerLawFit fit_linear(std::span<const ObservableRow> rows, Window window) {
  check_window(window);
  std::vector<double> x, y;
  for (const auto& r : rows) {
    if (r.t < window.t_lo || r.t > window.t_hi) continue;
    x.push_back(static_cast<double>(r.t));
    y.push_back(r.vbar);
  }
  return least_squares(x, y, window);
}

namespace {

std::vector<char> ball_mask(const Topology& topology, Vertex origin, std::uint64_t t) {
  std::vector<char> mask(topology.vertex_count(), 0);
  const auto radius = static_cast<std::uint32_t>(std::min<std::uint64_t>(2 * t, topology.vertex_count()));
  for (Vertex v : topology.ball(origin, radius)) mask[v] = 1;
  return mask;
}

std::vector<Vertex> unique_sorted(std::span<const Vertex> trajectory) {
  std::vector<Vertex> out(trajectory.begin(), trajectory.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

BusyWitness make_witness(std::vector<Vertex> vertices, std::span<const Role> roles) {
  std::sort(vertices.begin(), vertices.end());
  BusyWitness w;
  for (Vertex v : vertices) ++(roles[v] == Role::Car ? w.cars : w.spots);
  w.vertices = std::move(vertices);
  return w;
}

}  // namespace

std::optional<BusyWitness> busy_witness_1d(const Topology& topology, std::span<const Role> roles,
                                           std::span<const Vertex> trajectory, Vertex origin,
                                           std::uint64_t t) {
  if (topology.dimension() != 1) throw std::invalid_argument("busy_witness_1d requires a 1D topology");
  if (trajectory.empty()) throw std::invalid_argument("busy_witness_1d: trajectory log absent");
  const auto n = topology.vertex_count();
  const auto in_ball = ball_mask(topology, origin, t);
  const auto targets = unique_sorted(trajectory);
  std::vector<char> is_target(n, 0);
  for (Vertex v : targets) is_target[v] = 1;

  // Arcs a, a+1, ..., a+len-1 (mod n on cycles); shortest first for each start.
  for (Vertex a = 0; a < n; ++a) {
    if (!in_ball[a]) continue;
    std::int64_t balance = 0;
    std::size_t covered = 0;
    Vertex v = a;
    for (std::uint32_t len = 1; len <= n; ++len) {
      if (!in_ball[v]) break;
      balance += roles[v] == Role::Car ? 1 : -1;
      covered += is_target[v];
      if (covered == targets.size() && balance >= 0) {
        std::vector<Vertex> arc;
        for (std::uint32_t i = 0; i < len; ++i) arc.push_back((a + i) % n);
        return make_witness(std::move(arc), roles);
      }
      if (!topology.periodic() && v + 1 == n) break;
      v = (v + 1) % n;
    }
  }
  return std::nullopt;
}

namespace {

class BusySearch {
 public:
  BusySearch(const Topology& topology, std::span<const Role> roles, std::vector<char> in_ball,
             std::uint64_t budget)
      : topo_(topology), roles_(roles), in_ball_(std::move(in_ball)), budget_(budget),
        in_set_(topology.vertex_count(), 0), excluded_(topology.vertex_count(), 0) {
    for (Vertex v = 0; v < topology.vertex_count(); ++v) {
      if (in_ball_[v] && roles_[v] == Role::Car) ++cars_left_;
    }
  }

  BusySearchResult run(const std::vector<Vertex>& seed) {
    for (Vertex v : seed) include(v);
    BusySearchResult r;
    const auto status = search();
    r.nodes = nodes_;
    if (status == Status::Found) {
      r.outcome = SearchOutcome::Found;
      r.witness = make_witness(found_, roles_);
    } else {
      r.outcome = status == Status::Exhausted ? SearchOutcome::Inconclusive : SearchOutcome::None;
    }
    return r;
  }

 private:
  enum class Status { Found, None, Exhausted };

  void include(Vertex v) {
    in_set_[v] = 1;
    set_.push_back(v);
    balance_ += roles_[v] == Role::Car ? 1 : -1;
    if (roles_[v] == Role::Car) --cars_left_;
  }
  void uninclude(Vertex v) {
    in_set_[v] = 0;
    set_.pop_back();
    balance_ -= roles_[v] == Role::Car ? 1 : -1;
    if (roles_[v] == Role::Car) ++cars_left_;
  }

  std::optional<Vertex> pick_candidate() const {
    std::optional<Vertex> spot;
    for (Vertex s : set_) {
      for (Vertex y : topo_.adjacent(s)) {
        if (!in_ball_[y] || in_set_[y] || excluded_[y]) continue;
        if (roles_[y] == Role::Car) return y;
        if (!spot || y < *spot) spot = y;
      }
    }
    return spot;
  }

  Status search() {
    if (balance_ >= 0) {
      found_ = set_;
      return Status::Found;
    }
    if (++nodes_ > budget_) return Status::Exhausted;
    if (balance_ + cars_left_ < 0) return Status::None;
    const auto candidate = pick_candidate();
    if (!candidate) return Status::None;
    const Vertex u = *candidate;

    include(u);
    Status s = search();
    uninclude(u);
    if (s != Status::None) return s;

    excluded_[u] = 1;
    if (roles_[u] == Role::Car) --cars_left_;
    s = search();
    if (roles_[u] == Role::Car) ++cars_left_;
    excluded_[u] = 0;
    return s;
  }

  const Topology& topo_;
  std::span<const Role> roles_;
  std::vector<char> in_ball_;
  std::uint64_t budget_;
  std::vector<char> in_set_;
  std::vector<char> excluded_;
  std::vector<Vertex> set_;
  std::vector<Vertex> found_;
  std::int64_t balance_{0};
  std::int64_t cars_left_{0};
  std::uint64_t nodes_{0};
};

}  // namespace

BusySearchResult busy_witness_search(const Topology& topology, std::span<const Role> roles,
                                     std::span<const Vertex> trajectory, Vertex origin,
                                     std::uint64_t t, std::uint64_t node_budget) {
  if (trajectory.empty()) throw std::invalid_argument("busy_witness_search: trajectory log absent");
  BusySearch search(topology, roles, ball_mask(topology, origin, t), node_budget);
  return search.run(unique_sorted(trajectory));
}

EVCurve estimate_ev_curve(std::shared_ptr<const Topology> topology, std::span<const double> p_grid,
                          std::size_t replicas, std::uint64_t t_cap, std::uint64_t base_seed,
                          unsigned workers) {
  for (double p : p_grid) {
    if (!(p >= 0.0 && p < 0.5)) throw std::invalid_argument("estimate_ev_curve requires p < 1/2");
  }
  EVCurve curve;
  for (std::size_t r = 0; r < replicas; ++r) curve.seeds.push_back(derive_seed(base_seed, r));
  curve.per_replica.assign(p_grid.size(),
                           std::vector<double>(replicas, std::numeric_limits<double>::quiet_NaN()));

  parallel_for(p_grid.size() * replicas, workers, [&](std::size_t job) {
    const auto i = job / replicas, r = job % replicas;
    const auto result = run_to_absorption(topology, p_grid[i], curve.seeds[r], t_cap);
    if (result.absorbed()) curve.per_replica[i][r] = result.series.rows.back().vbar;
  });

  for (std::size_t i = 0; i < p_grid.size(); ++i) {
    std::vector<double> ok;
    for (double v : curve.per_replica[i]) {
      if (!std::isnan(v)) ok.push_back(v);
    }
    EVPoint point;
    point.p = p_grid[i];
    point.vbar = estimate_mean(ok);
    point.absorbed = ok.size();
    point.not_absorbed = replicas - ok.size();
    curve.points.push_back(point);
  }
  return curve;
}

}  // namespace parking::stats
