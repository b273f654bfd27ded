#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "parking/state.hpp"
#include "parking/topology.hpp"

// Independent exact computations used to check the engine and the closed-form
// laws. Nothing here calls into engine.hpp.
namespace parking::oracles {

using Rational = boost::multiprecision::cpp_rational;

struct Distribution {
  std::vector<long double> probabilities;  // support 0..size()-1
  long double mean{0};
  long double variance{0};
};

/// Law of M_t = max_{0<=k<=t} S_k for a +-1 walk with up-probability q, via
/// the reflected walk W_k = max(W_{k-1} + X_k, 0), which has the law of M_k.
/// O(t^2); t <= 20000.
Distribution running_max_dist(std::uint32_t t, double q);

/// Same law over (position, running max) pairs in exact rationals; t <= 200.
std::vector<Rational> running_max_dist_exact(std::uint32_t t, const Rational& q);

Rational mean_of(const std::vector<Rational>& distribution);

struct Oriented1dResult {
  Rational mean;
  std::vector<Rational> distribution;  // of V_t(0), support 0..t
};

/// Exhaustive enumeration of all 2^L roles on the right-to-left cycle of size
/// L (<= 22), each configuration run deterministically for t steps.
Oriented1dResult oriented1d_exact(std::uint32_t L, std::uint32_t t, const Rational& p);
long double oriented1d_mean(std::uint32_t L, std::uint32_t t, double p);

/// Literal two-phase stepper over all cars with no caching of candidate
/// spots; must agree with parking::step on every input.
void reference_step(SimState& state, const RandomnessSource& source,
                    IterationOrder order = IterationOrder::Forward);

/// E t(j), the first time the walk from center leaves B(center, j), from the
/// linear system (I - Q) x = 1 on the ball. The ball must not wrap.
double exit_time_exact(const Topology& topology, Vertex center, std::uint32_t radius);

struct ExitTime {
  double mean{0};
  double standard_error{0};
  std::uint64_t samples{0};  // 0 for exact
};

ExitTime exit_time_monte_carlo(const Topology& topology, Vertex center, std::uint32_t radius,
                               std::uint64_t nsamples, std::uint64_t seed);

enum class ExitMode : std::uint8_t { ExactDP, MonteCarlo };

/// Builds a non-wrapping instance of the family (side 2j+3) and measures from
/// its central vertex.
ExitTime exit_time_mean(Family family, std::uint32_t dimension, std::uint32_t radius,
                        ExitMode mode, std::uint64_t nsamples = 0, std::uint64_t seed = 0);

struct FPartial {
  double s{0};
  std::vector<double> terms;         // E t(j) s^j
  std::vector<double> partial_sums;  // F_J(s)
  double last_term{0};
  bool apparent_divergence{false};   // terms stopped decaying at the end
};

/// Partial sums of F(s) = sum_j E[t(j)] s^j for j <= j_max with exact exit times.
FPartial f_partial(Family family, std::uint32_t dimension, double s, std::uint32_t j_max);

struct ThresholdReport {
  std::uint32_t max_degree{0};
  double k_min{0};
  /// p(1-p) < c  <=>  s_p < K_min^2
  double c{0};
  /// Smaller root of p(1-p) = c.
  double p_star{0};
  bool root_bounds_ok{false};  // c/(1-c) <= p* <= 2c

  double s_p(double p) const;
  bool guaranteed_finite(double p) const { return s_p(p) < k_min * k_min; }
};

ThresholdReport small_p_threshold(std::uint32_t max_degree, double k_min);

/// The lattice closed forms implied by (2d, 1/(2d)) and (2d, 1/d).
double lattice_threshold(std::uint32_t dimension, bool oriented);

struct BoundReport {
  ThresholdReport threshold;
  double p{0};
  double s_p{0};
  bool below_threshold{false};
  std::optional<FPartial> f;  // only when s_p < 1
};

BoundReport bound_report(Family family, std::uint32_t dimension, double p, std::uint32_t j_max);

struct BusyBound {
  std::uint32_t j{0};
  double p{0};
  double exact{0};     // P[Z_1 + ... + Z_j >= 0]
  double chernoff{0};  // (2 sqrt(p(1-p)))^j
  bool holds() const noexcept { return exact <= chernoff; }
};

BusyBound binomial_busy(std::uint32_t j, double p);

/// Exact comparison tail^2 <= (4 p (1-p))^j in rationals.
bool binomial_busy_holds_exact(std::uint32_t j, const Rational& p);
Rational binomial_busy_tail_exact(std::uint32_t j, const Rational& p);

}  // namespace parking::oracles
