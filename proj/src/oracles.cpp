#include "parking/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace parking::oracles {

Distribution running_max_dist(std::uint32_t t, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("q must lie in [0,1]");
  if (t > 20000) throw std::invalid_argument("running_max_dist: t beyond the O(t^2) budget");
  const long double up = q, down = 1.0L - up;
  std::vector<long double> cur(t + 2, 0.0L), next(t + 2, 0.0L);
  cur[0] = 1.0L;
  for (std::uint32_t k = 0; k < t; ++k) {
    std::fill(next.begin(), next.begin() + k + 2, 0.0L);
    for (std::uint32_t w = 0; w <= k; ++w) {
      if (cur[w] == 0.0L) continue;
      next[w + 1] += up * cur[w];
      next[w == 0 ? 0 : w - 1] += down * cur[w];
    }
    std::swap(cur, next);
  }
  Distribution d;
  d.probabilities.assign(cur.begin(), cur.begin() + t + 1);
  for (std::size_t m = 0; m < d.probabilities.size(); ++m) d.mean += m * d.probabilities[m];
  for (std::size_t m = 0; m < d.probabilities.size(); ++m) {
    const long double dev = m - d.mean;
    d.variance += dev * dev * d.probabilities[m];
  }
  return d;
}

std::vector<Rational> running_max_dist_exact(std::uint32_t t, const Rational& q) {
  if (q < 0 || q > 1) throw std::invalid_argument("q must lie in [0,1]");
  if (t > 200) throw std::invalid_argument("running_max_dist_exact: t beyond budget");
  const Rational down = 1 - q;
  std::map<std::pair<std::int64_t, std::int64_t>, Rational> cur{{{0, 0}, Rational(1)}};
  for (std::uint32_t k = 0; k < t; ++k) {
    std::map<std::pair<std::int64_t, std::int64_t>, Rational> next;
    for (const auto& [key, prob] : cur) {
      const auto [pos, max] = key;
      if (q != 0) next[{pos + 1, std::max(max, pos + 1)}] += prob * q;
      if (down != 0) next[{pos - 1, max}] += prob * down;
    }
    cur = std::move(next);
  }
  std::vector<Rational> dist(t + 1, Rational(0));
  for (const auto& [key, prob] : cur) dist[static_cast<std::size_t>(key.second)] += prob;
  return dist;
}

Rational mean_of(const std::vector<Rational>& distribution) {
  Rational mean = 0;
  for (std::size_t k = 0; k < distribution.size(); ++k) mean += distribution[k] * k;
  return mean;
}

namespace {

struct EnumerationCounts {
  // counts[number of cars][V_t(0)]
  std::vector<std::vector<std::uint64_t>> counts;
};

EnumerationCounts enumerate_oriented(std::uint32_t L, std::uint32_t t) {
  if (L < 3) throw std::invalid_argument("oriented1d_exact requires L >= 3");
  if (L > 22) throw std::invalid_argument("oriented1d_exact: L beyond the enumeration budget");
  EnumerationCounts out;
  out.counts.assign(L + 1, std::vector<std::uint64_t>(t + 1, 0));
  std::vector<std::uint32_t> position;
  std::vector<bool> parked;
  std::vector<bool> vacant(L);
  for (std::uint32_t mask = 0; mask < (1u << L); ++mask) {
    position.clear();
    parked.clear();
    for (std::uint32_t v = 0; v < L; ++v) {
      const bool car = (mask >> v) & 1u;
      vacant[v] = !car;
      if (car) {
        position.push_back(v);
        parked.push_back(false);
      }
    }
    std::uint32_t visits_to_root = 0;
    for (std::uint32_t s = 1; s <= t; ++s) {
      // All cars shift left in lockstep, so two cars never share a site and
      // every arrival at a vacant spot parks immediately.
      for (std::size_t c = 0; c < position.size(); ++c) {
        if (parked[c]) continue;
        position[c] = (position[c] + L - 1) % L;
        if (position[c] == 0) ++visits_to_root;
        if (vacant[position[c]]) {
          vacant[position[c]] = false;
          parked[c] = true;
        }
      }
    }
    ++out.counts[position.size()][visits_to_root];
  }
  return out;
}

}  // namespace

Oriented1dResult oriented1d_exact(std::uint32_t L, std::uint32_t t, const Rational& p) {
  if (p < 0 || p > 1) throw std::invalid_argument("p must lie in [0,1]");
  const auto counts = enumerate_oriented(L, t);
  Oriented1dResult r;
  r.distribution.assign(t + 1, Rational(0));
  for (std::uint32_t k = 0; k <= L; ++k) {
    Rational weight = 1;
    for (std::uint32_t i = 0; i < k; ++i) weight *= p;
    for (std::uint32_t i = k; i < L; ++i) weight *= (1 - p);
    for (std::uint32_t v = 0; v <= t; ++v) {
      if (counts.counts[k][v]) r.distribution[v] += weight * Rational(counts.counts[k][v]);
    }
  }
  r.mean = mean_of(r.distribution);
  return r;
}

long double oriented1d_mean(std::uint32_t L, std::uint32_t t, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0,1]");
  const auto counts = enumerate_oriented(L, t);
  long double mean = 0;
  for (std::uint32_t k = 0; k <= L; ++k) {
    const long double weight = std::pow(static_cast<long double>(p), k) *
                               std::pow(1.0L - static_cast<long double>(p), L - k);
    for (std::uint32_t v = 0; v <= t; ++v) mean += weight * counts.counts[k][v] * v;
  }
  return mean;
}

void reference_step(SimState& state, const RandomnessSource& source, IterationOrder order) {
  const std::uint64_t t1 = state.time() + 1;
  const Topology& topo = state.topology();
  const auto& cars = state.cars();
  const auto ncars = static_cast<std::uint32_t>(cars.size());

  std::vector<std::uint32_t> sequence(ncars);
  for (std::uint32_t i = 0; i < ncars; ++i) {
    sequence[i] = order == IterationOrder::Forward ? i : ncars - 1 - i;
  }

  // Phase 1: choose every destination before anything changes.
  std::vector<std::pair<std::uint32_t, Vertex>> moves;
  for (std::uint32_t c : sequence) {
    if (cars[c].parked()) continue;
    const double u = source.draw(Purpose::Walk, cars[c].origin, t1);
    const auto nbrs = topo.neighbors(cars[c].position);
    Vertex dest = nbrs.back().vertex;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < nbrs.size(); ++i) {
      acc += nbrs[i].weight;
      if (u < acc) {
        dest = nbrs[i].vertex;
        break;
      }
    }
    moves.emplace_back(c, dest);
  }
  std::unordered_map<Vertex, std::vector<std::uint32_t>> arrivals;
  for (const auto& [c, dest] : moves) {
    StateMutator::set_position(state, c, dest);
    StateMutator::add_visit(state, dest);
    arrivals[dest].push_back(c);
  }

  // Phase 2: each vacant spot with arrivals goes to the smallest tie draw.
  for (Vertex w = 0; w < state.vertex_count(); ++w) {
    if (state.spot_status(w) != SpotStatus::Vacant) continue;
    const auto it = arrivals.find(w);
    if (it == arrivals.end()) continue;
    std::uint32_t winner = it->second.front();
    for (std::uint32_t c : it->second) {
      const double a = source.draw(Purpose::Tie, cars[c].origin, t1);
      const double b = source.draw(Purpose::Tie, cars[winner].origin, t1);
      if (a < b || (a == b && cars[c].origin < cars[winner].origin)) winner = c;
    }
    StateMutator::park(state, winner, w, t1);
  }
  StateMutator::finish_step(state);
}

double exit_time_exact(const Topology& topology, Vertex center, std::uint32_t radius) {
  if (topology.periodic() && 2 * radius + 2 > topology.side())
    throw std::invalid_argument("exit_time_exact: ball wraps around the torus");
  const auto ball = topology.ball(center, radius);
  std::unordered_map<Vertex, int> index;
  for (std::size_t i = 0; i < ball.size(); ++i) index[ball[i]] = static_cast<int>(i);

  const int n = static_cast<int>(ball.size());
  std::vector<Eigen::Triplet<double>> entries;
  for (int i = 0; i < n; ++i) {
    entries.emplace_back(i, i, 1.0);
    for (const auto& nb : topology.neighbors(ball[i])) {
      const auto it = index.find(nb.vertex);
      if (it != index.end()) entries.emplace_back(i, it->second, -nb.weight);
    }
  }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(entries.begin(), entries.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
  solver.compute(A);
  if (solver.info() != Eigen::Success) throw std::runtime_error("exit-time system is singular");
  const Eigen::VectorXd x = solver.solve(Eigen::VectorXd::Ones(n));
  return x[index.at(center)];
}

ExitTime exit_time_monte_carlo(const Topology& topology, Vertex center, std::uint32_t radius,
                               std::uint64_t nsamples, std::uint64_t seed) {
  if (nsamples == 0) throw std::invalid_argument("exit_time_monte_carlo: nsamples must be > 0");
  if (topology.periodic() && 2 * radius + 2 > topology.side())
    throw std::invalid_argument("exit_time_monte_carlo: ball wraps around the torus");
  const RandomnessSource source(seed);
  long double sum = 0, sum_sq = 0;
  for (std::uint64_t i = 0; i < nsamples; ++i) {
    Vertex x = center;
    std::uint64_t steps = 0;
    do {
      ++steps;
      x = topology.sample_neighbor(x, source.draw(Purpose::Walk, i, steps));
    } while (topology.distance(center, x) <= radius);
    sum += steps;
    sum_sq += static_cast<long double>(steps) * steps;
  }
  ExitTime r;
  r.samples = nsamples;
  r.mean = static_cast<double>(sum / nsamples);
  const long double var =
      nsamples > 1 ? (sum_sq - sum * sum / nsamples) / (nsamples - 1) : 0.0L;
  r.standard_error = static_cast<double>(std::sqrt(var / nsamples));
  return r;
}

namespace {

Topology exit_instance(Family family, std::uint32_t dimension, std::uint32_t radius, Vertex& center) {
  TopologySpec spec;
  spec.family = family;
  spec.dimension = dimension;
  spec.side = 2 * radius + 3;
  spec.boundary = Boundary::Reflecting;
  Topology topo(spec);
  std::vector<std::uint32_t> mid(topo.dimension(), radius + 1);
  center = topo.vertex_at(mid);
  return topo;
}

}  // namespace

ExitTime exit_time_mean(Family family, std::uint32_t dimension, std::uint32_t radius, ExitMode mode,
                        std::uint64_t nsamples, std::uint64_t seed) {
  Vertex center = 0;
  const Topology topo = exit_instance(family, dimension, radius, center);
  if (mode == ExitMode::ExactDP) return {exit_time_exact(topo, center, radius), 0.0, 0};
  return exit_time_monte_carlo(topo, center, radius, nsamples, seed);
}

FPartial f_partial(Family family, std::uint32_t dimension, double s, std::uint32_t j_max) {
  if (!(s >= 0.0 && s < 1.0)) throw std::invalid_argument("f_partial requires 0 <= s < 1");
  FPartial f;
  f.s = s;
  double sum = 0.0, power = 1.0;
  for (std::uint32_t j = 0; j <= j_max; ++j) {
    const double term = exit_time_mean(family, dimension, j, ExitMode::ExactDP).mean * power;
    f.terms.push_back(term);
    sum += term;
    f.partial_sums.push_back(sum);
    power *= s;
  }
  f.last_term = f.terms.back();
  f.apparent_divergence = j_max >= 1 && f.terms[j_max] >= f.terms[j_max - 1];
  return f;
}

double ThresholdReport::s_p(double p) const {
  return 2.0 * std::numbers::e * max_degree * std::sqrt(p * (1.0 - p));
}

ThresholdReport small_p_threshold(std::uint32_t max_degree, double k_min) {
  if (max_degree < 1) throw std::invalid_argument("max degree must be >= 1");
  if (!(k_min > 0.0 && k_min <= 1.0)) throw std::invalid_argument("K_min must lie in (0,1]");
  ThresholdReport r;
  r.max_degree = max_degree;
  r.k_min = k_min;
  const double e2 = std::numbers::e * std::numbers::e;
  const double k2 = k_min * k_min;
  const double delta = max_degree;
  r.c = k2 * k2 / (4.0 * e2 * delta * delta);
  // 2c / (1 + sqrt(1 - 4c)) is the smaller root of p(1-p) = c without cancellation.
  r.p_star = 2.0 * r.c / (1.0 + std::sqrt(1.0 - 4.0 * r.c));
  // p* = c / (1 - p*) with p* > c gives the lower bound; 1 + sqrt(1 - 4c) >= 1 the upper.
  r.root_bounds_ok = r.c / (1.0 - r.c) <= r.p_star && r.p_star <= 2.0 * r.c;
  return r;
}

double lattice_threshold(std::uint32_t dimension, bool oriented) {
  const double d6 = std::pow(static_cast<double>(dimension), 6);
  const double e2 = std::numbers::e * std::numbers::e;
  return 1.0 / ((oriented ? 16.0 : 256.0) * d6 * e2);
}

BoundReport bound_report(Family family, std::uint32_t dimension, double p, std::uint32_t j_max) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0,1]");
  Vertex center = 0;
  const auto stats = exit_instance(family, dimension, 1, center).kernel_stats();
  BoundReport r;
  r.threshold = small_p_threshold(stats.max_degree, stats.k_min);
  r.p = p;
  r.s_p = r.threshold.s_p(p);
  r.below_threshold = r.threshold.guaranteed_finite(p);
  if (r.s_p < 1.0) r.f = f_partial(family, dimension, r.s_p, j_max);
  return r;
}

BusyBound binomial_busy(std::uint32_t j, double p) {
  if (j < 1) throw std::invalid_argument("binomial_busy requires j >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0,1]");
  BusyBound b;
  b.j = j;
  b.p = p;
  long double tail = 0, coef = 1;
  const long double lp = p, lq = 1.0L - lp;
  for (std::uint32_t k = 0; k <= j; ++k) {
    if (2 * k >= j) tail += coef * std::pow(lp, k) * std::pow(lq, j - k);
    coef = coef * (j - k) / (k + 1);
  }
  b.exact = static_cast<double>(tail);
  b.chernoff = static_cast<double>(std::pow(2.0L * std::sqrt(lp * lq), j));
  return b;
}

namespace {

// With p = a/b, b^j * tail = sum_{2k >= j} C(j,k) a^k (b-a)^(j-k), an integer.
boost::multiprecision::cpp_int scaled_tail(std::uint32_t j, const boost::multiprecision::cpp_int& a,
                                           const boost::multiprecision::cpp_int& b) {
  using boost::multiprecision::cpp_int;
  using boost::multiprecision::pow;
  cpp_int tail = 0, coef = 1;
  for (std::uint32_t k = 0; k <= j; ++k) {
    if (2 * k >= j) tail += coef * pow(a, k) * pow(cpp_int(b - a), j - k);
    coef = coef * (j - k) / (k + 1);
  }
  return tail;
}

}  // namespace

Rational binomial_busy_tail_exact(std::uint32_t j, const Rational& p) {
  if (j < 1) throw std::invalid_argument("binomial_busy requires j >= 1");
  if (p < 0 || p > 1) throw std::invalid_argument("p must lie in [0,1]");
  const auto a = numerator(p), b = denominator(p);
  return Rational(scaled_tail(j, a, b)) / Rational(boost::multiprecision::pow(b, j));
}

bool binomial_busy_holds_exact(std::uint32_t j, const Rational& p) {
  if (j < 1) throw std::invalid_argument("binomial_busy requires j >= 1");
  if (p < 0 || p > 1) throw std::invalid_argument("p must lie in [0,1]");
  // tail^2 <= (4p(1-p))^j  <=>  (b^j tail)^2 <= (4a(b-a))^j
  const auto a = numerator(p), b = denominator(p);
  const auto t = scaled_tail(j, a, b);
  return t * t <= boost::multiprecision::pow(boost::multiprecision::cpp_int(4 * a * (b - a)), j);
}

}  // namespace parking::oracles
