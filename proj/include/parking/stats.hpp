#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "parking/engine.hpp"

namespace parking::stats {

struct MeanEstimate {
  double mean{0};
  double standard_error{0};
  std::size_t n{0};
};

/// Sample mean with the normal-approximation standard error.
MeanEstimate estimate_mean(std::span<const double> values);

// --- recursion for E V_{t+1} - E V_t -------------------------------------

struct ResidualPoint {
  std::uint64_t t{0};
  double mean{0};
  double standard_error{0};
  /// |mean| <= k * SE; a zero mean with zero SE counts as within.
  bool within(double k) const noexcept;
};

struct RecursionResidual {
  std::vector<ResidualPoint> points;
  double fraction_within(double k) const;
  bool exactly_zero() const;
};

/// r_t = (Vbar_{t+1} - Vbar_t) - (2p - 1) - frac_spot_unvisited(t), averaged
/// over independent replicas.
RecursionResidual recursion_residual(std::span<const SimSeries> ensemble, double p);

// --- parking probabilities -----------------------------------------------

struct ParkProbabilities {
  std::uint32_t n_cars{0};
  std::uint32_t n_spots{0};
  std::uint32_t parked_cars{0};
  std::uint32_t occupied_spots{0};
  std::optional<double> frac_cars_parked;      // absent when n_cars == 0
  std::optional<double> frac_spots_parked_in;  // absent when n_spots == 0
  /// Binomial normal-approximation standard errors of the two fractions.
  double se_cars{0};
  double se_spots{0};
  /// parked cars and occupied spots are in bijection.
  bool duality_holds{false};
};

ParkProbabilities empirical_park_probs(const SimState& state);
ParkProbabilities empirical_park_probs(const SimSeries& series);

// --- conditional no-visit probabilities ----------------------------------

struct ConditionalNoVisit {
  std::optional<MeanEstimate> given_car;   // P[V_t = 0 | car origin]
  MeanEstimate unconditional;              // P[V_t = 0]
  std::optional<MeanEstimate> given_spot;  // P[V_t = 0 | spot]
  /// given_car <= unconditional <= given_spot up to k standard errors.
  bool ordered_within(double k) const;
};

ConditionalNoVisit conditional_no_visit(std::span<const SimState> states);

// --- regression -----------------------------------------------------------

struct Window {
  std::uint64_t t_lo{0};
  std::uint64_t t_hi{0};
};

/// [L/2, L] for oriented kernels, [2L, 4L] otherwise.
Window default_window(const TopologySpec& spec);

struct PowerLawFit {
  Window window;
  double slope{0};
  double intercept{0};
  double rss{0};
  std::size_t points{0};
};

/// Ordinary least squares of log Vbar_t on log t over rows with t in the
/// window, t > 0 and Vbar_t > 0. Needs at least three such rows.
PowerLawFit fit_power_law(std::span<const ObservableRow> rows, Window window);

/// Ordinary least squares of Vbar_t on t over the window.
PowerLawFit fit_linear(std::span<const ObservableRow> rows, Window window);

// --- busy sets --------------------------------------------------------------

struct BusyWitness {
  std::vector<Vertex> vertices;  // ascending
  std::int64_t cars{0};
  std::int64_t spots{0};
};

/// Exhaustive scan of the intervals (arcs on a cycle) inside B(v, 2t) that
/// contain the trajectory; returns one with at least as many initial cars as
/// spots, or nullopt.
std::optional<BusyWitness> busy_witness_1d(const Topology& topology, std::span<const Role> roles,
                                           std::span<const Vertex> trajectory, Vertex origin,
                                           std::uint64_t t);

enum class SearchOutcome : std::uint8_t { Found, None, Inconclusive };

struct BusySearchResult {
  SearchOutcome outcome{SearchOutcome::None};
  std::optional<BusyWitness> witness;
  std::uint64_t nodes{0};
};

/// Depth-first search over connected supersets of the trajectory inside
/// B(v, 2t), pruned by the best achievable car-spot balance.
BusySearchResult busy_witness_search(const Topology& topology, std::span<const Role> roles,
                                     std::span<const Vertex> trajectory, Vertex origin,
                                     std::uint64_t t, std::uint64_t node_budget);

// --- E V curve ------------------------------------------------------------

struct EVPoint {
  double p{0};
  MeanEstimate vbar;
  std::size_t absorbed{0};
  std::size_t not_absorbed{0};
};

struct EVCurve {
  std::vector<EVPoint> points;
  /// per_replica[i][r]: Vbar at absorption for grid point i, replica r; NaN if not absorbed.
  std::vector<std::vector<double>> per_replica;
  std::vector<std::uint64_t> seeds;
};

/// Runs every p with the same replica seeds, so replicas are coupled across p.
EVCurve estimate_ev_curve(std::shared_ptr<const Topology> topology, std::span<const double> p_grid,
                          std::size_t replicas, std::uint64_t t_cap, std::uint64_t base_seed,
                          unsigned workers = 1);

}  // namespace parking::stats
