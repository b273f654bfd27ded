// Acceptance gate: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "parking/engine.hpp"
#include "parking/oracles.hpp"
#include "parking/stats.hpp"

using namespace parking;
using oracles::Rational;

namespace {

struct Verdict {
  bool pass{true};
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::shared_ptr<const Topology> make(Family f, std::uint32_t d, std::uint32_t L,
                                     Boundary b = Boundary::Periodic) {
  return std::make_shared<const Topology>(TopologySpec{f, d, L, b});
}

// Mixed-topology corpus for criteria 1 and 2: N <= 10^4, t <= 500.
struct Instance {
  std::shared_ptr<const Topology> topology;
  double p;
  std::uint64_t seed;
  std::uint64_t t;
};

Instance corpus_instance(std::size_t i) {
  const RandomnessSource src(derive_seed(1001, i));
  auto u = [&](std::uint64_t k) { return src.draw(Purpose::Role, 0, k); };
  // log-uniform vertex count in [10, 10^4]
  const double n_target = std::pow(10.0, 1.0 + 3.0 * u(1));
  std::shared_ptr<const Topology> t;
  switch (i % 7) {
    case 0: t = make(Family::UnorientedTorus, 2, std::max(3u, static_cast<std::uint32_t>(std::sqrt(n_target)))); break;
    case 1: t = make(Family::OrientedTorus, 2, std::max(3u, static_cast<std::uint32_t>(std::sqrt(n_target)))); break;
    case 2: t = make(Family::UnorientedTorus, 3, std::max(3u, static_cast<std::uint32_t>(std::cbrt(n_target)))); break;
    case 3: t = make(Family::Cycle1D, 1, static_cast<std::uint32_t>(n_target)); break;
    case 4: t = make(Family::OrientedCycle1D, 1, static_cast<std::uint32_t>(n_target)); break;
    case 5: t = make(Family::Path1D, 1, static_cast<std::uint32_t>(n_target), Boundary::Reflecting); break;
    default: t = make(Family::Path1D, 1, static_cast<std::uint32_t>(n_target), Boundary::Periodic); break;
  }
  return {t, u(2), derive_seed(2002, i), 1 + static_cast<std::uint64_t>(u(3) * 500)};
}

struct CorpusTally {
  std::uint64_t steps{0};
  std::uint64_t conservation_failures{0};
  std::uint64_t identity_failures{0};
  std::uint32_t max_n{0};
};

const CorpusTally& corpus() {
  static const CorpusTally tally = [] {
    CorpusTally t;
    for (std::size_t i = 0; i < 200; ++i) {
      const auto inst = corpus_instance(i);
      const RandomnessSource src(inst.seed);
      SimState s(inst.topology, sample_initial(*inst.topology, inst.p, src));
      t.max_n = std::max(t.max_n, s.vertex_count());
      for (std::uint64_t k = 0; k <= inst.t; ++k) {
        if (k > 0) step(s, src);
        ++t.steps;
        const auto c = conservation_check(s);
        if (!c.parked_equals_occupied || !c.balance_preserved || !c.counters_consistent)
          ++t.conservation_failures;
        if (!visit_identity_check(s).holds()) ++t.identity_failures;
      }
    }
    return t;
  }();
  return tally;
}

Verdict criterion1() {
  const auto& t = corpus();
  return {t.conservation_failures == 0,
          fmt("200 runs, max N=%u, %llu checked steps, %llu failures", t.max_n,
              static_cast<unsigned long long>(t.steps),
              static_cast<unsigned long long>(t.conservation_failures))};
}

Verdict criterion2() {
  const auto& t = corpus();
  return {t.identity_failures == 0, fmt("%llu checked steps, %llu failures",
                                        static_cast<unsigned long long>(t.steps),
                                        static_cast<unsigned long long>(t.identity_failures))};
}

Verdict criterion3() {
  std::uint64_t steps = 0, mismatches = 0;
  for (std::size_t i = 0; i < 100; ++i) {
    const RandomnessSource draw(derive_seed(3003, i));
    auto u = [&](std::uint64_t k) { return draw.draw(Purpose::Role, 0, k); };
    const double n_target = std::pow(10.0, 1.0 + 2.0 * u(1));
    std::shared_ptr<const Topology> t;
    switch (i % 5) {
      case 0: t = make(Family::UnorientedTorus, 2, std::max(3u, static_cast<std::uint32_t>(std::sqrt(n_target)))); break;
      case 1: t = make(Family::OrientedTorus, 2, std::max(3u, static_cast<std::uint32_t>(std::sqrt(n_target)))); break;
      case 2: t = make(Family::Cycle1D, 1, std::max(3u, static_cast<std::uint32_t>(n_target))); break;
      case 3: t = make(Family::Path1D, 1, static_cast<std::uint32_t>(n_target), Boundary::Reflecting); break;
      default: t = make(Family::UnorientedTorus, 3, std::max(3u, static_cast<std::uint32_t>(std::cbrt(n_target)))); break;
    }
    const std::uint64_t t_max = 1 + static_cast<std::uint64_t>(u(2) * 200);
    const RandomnessSource src(derive_seed(3004, i));
    const auto init = sample_initial(*t, u(3), src);
    const auto order = i % 2 ? IterationOrder::Reversed : IterationOrder::Forward;
    SimState fast(t, init, true), slow(t, init, true), rev(t, init, true);
    for (std::uint64_t k = 0; k < t_max; ++k) {
      step(fast, src);
      step(rev, src, IterationOrder::Reversed);
      oracles::reference_step(slow, src, order);
      ++steps;
      if (!(fast == slow) || !(fast == rev)) ++mismatches;
    }
  }
  return {mismatches == 0, fmt("100 instances, %llu steps, %llu mismatched",
                               static_cast<unsigned long long>(steps),
                               static_cast<unsigned long long>(mismatches))};
}

Verdict criterion4() {
  Verdict v;
  // (a) enumeration against the running-maximum law at p = 1/2
  std::size_t law_mismatch = 0;
  for (std::uint32_t t = 1; t <= 10; ++t) {
    const auto law = oracles::oriented1d_exact(std::max(3u, t + 2), t, Rational(1, 2)).distribution;
    const auto max_law = oracles::running_max_dist_exact(t, Rational(1, 2));
    if (law != max_law) ++law_mismatch;
  }
  // (b) engine Monte Carlo, L = 10^5, against exact E V_t for every p and t <= 10.
  // Sites more than 2t apart evolve independently, so block means over 100
  // consecutive sites are treated as independent for the standard error.
  constexpr std::uint32_t kL = 100000, kBlock = 100, kT = 10;
  std::size_t outside = 0, compared = 0;
  double worst_z = 0;
  auto ring = make(Family::OrientedCycle1D, 1, kL);
  for (const auto& p : {Rational(1, 4), Rational(1, 2), Rational(3, 4)}) {
    const RandomnessSource src(derive_seed(4004, compared));
    SimState s(ring, sample_initial(*ring, static_cast<double>(p), src));
    for (std::uint32_t t = 1; t <= kT; ++t) {
      step(s, src);
      const double exact = static_cast<double>(oracles::oriented1d_exact(std::max(3u, t + 2), t, p).mean);
      std::vector<double> blocks;
      for (std::uint32_t b = 0; b < kL / kBlock; ++b) {
        double sum = 0;
        for (std::uint32_t x = b * kBlock; x < (b + 1) * kBlock; ++x) sum += s.visits(x);
        blocks.push_back(sum / kBlock);
      }
      const auto est = stats::estimate_mean(blocks);
      const double z = std::abs(est.mean - exact) / est.standard_error;
      worst_z = std::max(worst_z, z);
      ++compared;
      if (z > 3.0) ++outside;
    }
  }
  // (c) E V_100 on the long ring against E M_100.
  const auto series = run(ring, 0.5, 4005, 100, {.keep_final_state = true});
  std::vector<double> blocks;
  for (std::uint32_t b = 0; b < kL / 1000; ++b) {
    double sum = 0;
    for (std::uint32_t x = b * 1000; x < (b + 1) * 1000; ++x) sum += series.final_state->visits(x);
    blocks.push_back(sum / 1000);
  }
  const auto est100 = stats::estimate_mean(blocks);
  const double m100 = static_cast<double>(oracles::running_max_dist(100, 0.5).mean);
  const double z100 = std::abs(est100.mean - m100) / est100.standard_error;
  // (d) asymptotics of E M_t
  const double ratio = static_cast<double>(oracles::running_max_dist(10000, 0.5).mean) /
                       std::sqrt(20000.0 / std::numbers::pi);
  v.pass = law_mismatch == 0 && outside == 0 && z100 <= 3.0 && ratio >= 0.98 && ratio <= 1.02;
  v.detail = fmt("law mismatches %zu/10; MC outside 3SE %zu/%zu (max z %.2f); t=100 z %.2f; "
                 "E M_10000/sqrt(20000/pi) = %.5f",
                 law_mismatch, outside, compared, worst_z, z100, ratio);
  return v;
}

Verdict criterion5() {
  constexpr std::size_t kReplicas = 10;
  auto torus = make(Family::UnorientedTorus, 2, 200);
  std::vector<double> cars_parked(kReplicas), spots_parked(kReplicas);
  bool all_parked = true, saturated = true, duality = true;
  for (std::size_t r = 0; r < kReplicas; ++r) {
    // Run until saturation, then a few steps more.
    const RandomnessSource src(derive_seed(5005, r));
    SimState s(torus, sample_initial(*torus, 0.6, src));
    std::uint64_t t = 0;
    while (s.vacant_spots() > 0 && t < 200000) {
      step(s, src);
      ++t;
    }
    for (int extra = 0; extra < 10; ++extra) step(s, src);
    saturated = saturated && s.vacant_spots() == 0;
    const auto pp = stats::empirical_park_probs(s);
    duality = duality && pp.duality_holds &&
              *pp.frac_cars_parked == static_cast<double>(s.n_spots()) / s.n_cars();
    cars_parked[r] = *pp.frac_cars_parked;

    const auto absorbed = run_to_absorption(torus, 0.3, derive_seed(5006, r), 10000000);
    all_parked = all_parked && absorbed.absorbed() && absorbed.series.parked_cars == absorbed.series.n_cars;
    spots_parked[r] = *stats::empirical_park_probs(absorbed.series).frac_spots_parked_in;
  }
  const auto c = stats::estimate_mean(cars_parked), sp = stats::estimate_mean(spots_parked);
  const double zc = std::abs(c.mean - 2.0 / 3.0) / c.standard_error;
  const double zs = std::abs(sp.mean - 3.0 / 7.0) / sp.standard_error;
  return {saturated && duality && all_parked && zc <= 3 && zs <= 3,
          fmt("p=0.6: frac_cars_parked %.5f (se %.5f, z %.2f); p=0.3: all parked %s, "
              "frac_spots_parked_in %.5f (se %.5f, z %.2f); %zu replicas",
              c.mean, c.standard_error, zc, all_parked ? "yes" : "no", sp.mean, sp.standard_error, zs,
              kReplicas)};
}

// Ensemble shared by criteria 6 and 8.
const std::vector<std::vector<SimSeries>>& recursion_ensemble() {
  static const auto ensemble = [] {
    std::vector<std::vector<SimSeries>> out;
    auto torus = make(Family::UnorientedTorus, 2, 100);
    for (double p : {0.3, 0.5, 0.7}) {
      std::vector<SimSeries> reps;
      for (std::size_t r = 0; r < 50; ++r) reps.push_back(run(torus, p, derive_seed(6006, r), 200));
      out.push_back(std::move(reps));
    }
    return out;
  }();
  return ensemble;
}

Verdict criterion6() {
  const double ps[] = {0.3, 0.5, 0.7};
  Verdict v;
  const auto& ens = recursion_ensemble();
  for (std::size_t i = 0; i < 3; ++i) {
    const auto res = stats::recursion_residual(ens[i], ps[i]);
    const double frac = res.fraction_within(4.0);
    v.pass = v.pass && frac >= 0.95;
    v.detail += fmt("p=%.1f within 4SE %.3f; ", ps[i], frac);
  }
  auto torus = make(Family::UnorientedTorus, 2, 100);
  for (double p : {0.0, 1.0}) {
    std::vector<SimSeries> reps;
    for (std::size_t r = 0; r < 5; ++r) reps.push_back(run(torus, p, derive_seed(6007, r), 200));
    const bool zero = stats::recursion_residual(reps, p).exactly_zero();
    v.pass = v.pass && zero;
    v.detail += fmt("p=%.0f exact zero %s; ", p, zero ? "yes" : "no");
  }
  return v;
}

Verdict criterion7() {
  std::uint64_t violations = 0, cars = 0;
  std::set<int> families;
  for (std::size_t i = 0; i < 1000; ++i) {
    const RandomnessSource draw(derive_seed(7007, i));
    auto u = [&](std::uint64_t k) { return draw.draw(Purpose::Role, 0, k); };
    std::shared_ptr<const Topology> t;
    double lo = 0.3, hi = 0.5;
    std::uint64_t t_max = 500;
    switch (i % 5) {
      case 0: t = make(Family::Cycle1D, 1, 500); break;
      case 1: t = make(Family::UnorientedTorus, 2, 10 + static_cast<std::uint32_t>(u(1) * 20)); break;
      case 2: t = make(Family::OrientedTorus, 2, 10 + static_cast<std::uint32_t>(u(1) * 20)); break;
      case 3: t = make(Family::Path1D, 1, 50 + static_cast<std::uint32_t>(u(1) * 450), Boundary::Reflecting); break;
      default: t = make(Family::OrientedCycle1D, 1, 50 + static_cast<std::uint32_t>(u(1) * 450)); break;
    }
    if (i % 5 != 0) {
      const double a = u(2), b = u(3);
      lo = std::min(a, b);
      hi = std::max(a, b);
      t_max = 50 + static_cast<std::uint64_t>(u(4) * 250);
    }
    families.insert(static_cast<int>(t->spec().family));
    const auto rep = couple_run(t, lo, hi, derive_seed(7008, i), t_max);
    violations += rep.violation_count;
    cars += rep.cars_compared;
  }
  return {violations == 0, fmt("1000 pairs over %zu families, %llu car comparisons, %llu violations",
                               families.size(), static_cast<unsigned long long>(cars),
                               static_cast<unsigned long long>(violations))};
}

Verdict criterion8() {
  const double ps[] = {0.3, 0.5, 0.7};
  Verdict v;
  const auto& ens = recursion_ensemble();
  for (std::size_t i = 0; i < 3; ++i) {
    const double p = ps[i];
    std::size_t violations = 0;
    double worst = 0;  // max of sample mean / bound
    for (std::size_t t = 1; t <= 200; ++t) {
      std::vector<double> sq;
      for (const auto& s : ens[i]) sq.push_back(s.rows[t].vbar_sq);
      const auto est = stats::estimate_mean(sq);
      const double bound = p * (p + 1) * static_cast<double>(t * t);
      if (est.mean > bound + 3 * est.standard_error) ++violations;
      worst = std::max(worst, est.mean / bound);
    }
    v.pass = v.pass && violations == 0;
    v.detail += fmt("p=%.1f violations %zu, max mean/bound %.3f; ", p, violations, worst);
  }
  return v;
}

Verdict criterion9() {
  auto torus = make(Family::UnorientedTorus, 2, 200);
  const double p = 0.7;
  const auto series = run(torus, p, 9009, 600);
  if (!series.saturation_time) return {false, "no saturation by t=600"};
  const double n = series.n_vertices;
  const auto excess = static_cast<long long>(series.n_cars) - static_cast<long long>(series.n_spots);
  std::size_t bad = 0, post = 0;
  for (std::size_t t = *series.saturation_time; t + 1 < series.rows.size(); ++t) {
    const long long inc = std::llround(series.rows[t + 1].vbar * n) - std::llround(series.rows[t].vbar * n);
    ++post;
    if (inc != excess) ++bad;
  }
  std::uint64_t t90 = 0;
  for (const auto& r : series.rows) {
    if (r.vacant_spots <= 0.1 * series.n_spots) {
      t90 = r.t;
      break;
    }
  }
  const auto fit = stats::fit_linear(series.rows, {t90, *series.saturation_time});
  const double target = 2 * p - 1;
  const bool slope_ok = std::abs(fit.slope - target) <= 0.05;
  return {bad == 0 && post > 0 && slope_ok,
          fmt("post-saturation steps %zu, increments != N_cars-N_spots: %zu; slope on [%llu, %llu] = %.4f "
              "(target %.2f +- 0.05)",
              post, bad, static_cast<unsigned long long>(t90),
              static_cast<unsigned long long>(*series.saturation_time), fit.slope, target)};
}

Verdict criterion10() {
  const auto oriented = run(make(Family::OrientedTorus, 2, 300), 0.5, 10010, 300);
  const auto fo = stats::fit_power_law(oriented.rows, stats::default_window(oriented.topology));
  const auto unoriented = run(make(Family::UnorientedTorus, 2, 300), 0.5, 10011, 1200);
  const auto fu = stats::fit_power_law(unoriented.rows, stats::default_window(unoriented.topology));
  const bool ok = fo.slope >= 0.15 && fo.slope <= 0.35 && fu.slope >= 0.38 && fu.slope <= 0.60;
  return {ok, fmt("oriented slope %.4f on [%llu, %llu] (want [0.15, 0.35]); unoriented slope %.4f on "
                  "[%llu, %llu] (want [0.38, 0.60])",
                  fo.slope, static_cast<unsigned long long>(fo.window.t_lo),
                  static_cast<unsigned long long>(fo.window.t_hi), fu.slope,
                  static_cast<unsigned long long>(fu.window.t_lo),
                  static_cast<unsigned long long>(fu.window.t_hi))};
}

std::string five_digits(double x) { return fmt("%.4e", x); }

Verdict criterion11() {
  const auto un = oracles::small_p_threshold(4, 0.25);
  const auto ori = oracles::small_p_threshold(4, 0.5);
  const double e2 = std::exp(-2.0);
  const bool c_un = five_digits(un.c) == five_digits(std::ldexp(e2, -14)) && five_digits(un.c) == "8.2602e-06";
  const bool c_or = five_digits(ori.c) == five_digits(std::ldexp(e2, -10)) && five_digits(ori.c) == "1.3216e-04";
  std::size_t violations = 0, checked = 0;
  for (std::uint32_t k = 1; k <= 99; ++k) {
    for (std::uint32_t j = 1; j <= 60; ++j) {
      ++checked;
      if (!oracles::binomial_busy_holds_exact(j, Rational(k, 200))) ++violations;
    }
  }
  return {c_un && c_or && violations == 0,
          fmt("c(4, 1/4) = %s, c(4, 1/2) = %s; Chernoff bound violations %zu/%zu (exact rationals)",
              five_digits(un.c).c_str(), five_digits(ori.c).c_str(), violations, checked)};
}

Verdict criterion12() {
  std::uint64_t survivors1 = 0, missing1 = 0;
  for (std::size_t i = 0; i < 100; ++i) {
    const RandomnessSource draw(derive_seed(12012, i));
    auto u = [&](std::uint64_t k) { return draw.draw(Purpose::Role, 0, k); };
    const auto L = 100 + static_cast<std::uint32_t>(u(1) * 900);
    auto t = i % 2 ? make(Family::Cycle1D, 1, L) : make(Family::Path1D, 1, L, Boundary::Reflecting);
    const double p = 0.05 + 0.44 * u(2);
    const std::uint64_t T = 1 + static_cast<std::uint64_t>(u(3) * 50);
    const auto series = run(t, p, derive_seed(12013, i), T, {.record_trajectories = true, .keep_final_state = true});
    const auto& s = *series.final_state;
    for (auto c : s.unparked_indices()) {
      ++survivors1;
      if (!stats::busy_witness_1d(*t, s.roles(), s.trajectory(c), s.cars()[c].origin, T)) ++missing1;
    }
  }
  std::uint64_t survivors2 = 0, found2 = 0, none2 = 0, inconclusive2 = 0;
  for (std::size_t i = 0; i < 20; ++i) {
    const RandomnessSource draw(derive_seed(12014, i));
    auto u = [&](std::uint64_t k) { return draw.draw(Purpose::Role, 0, k); };
    auto t = make(Family::UnorientedTorus, 2, 20);
    const double p = 0.05 + 0.44 * u(1);
    const std::uint64_t T = 1 + static_cast<std::uint64_t>(u(2) * 3);
    const auto series = run(t, p, derive_seed(12015, i), T, {.record_trajectories = true, .keep_final_state = true});
    const auto& s = *series.final_state;
    for (auto c : s.unparked_indices()) {
      ++survivors2;
      const auto res = stats::busy_witness_search(*t, s.roles(), s.trajectory(c), s.cars()[c].origin, T, 1000000);
      if (res.outcome == stats::SearchOutcome::Found) ++found2;
      if (res.outcome == stats::SearchOutcome::None) ++none2;
      if (res.outcome == stats::SearchOutcome::Inconclusive) ++inconclusive2;
    }
  }
  return {survivors1 > 0 && missing1 == 0 && found2 == survivors2,
          fmt("1D: %llu survivors, %llu without witness; 2D: %llu survivors, %llu found, %llu none, "
              "%llu inconclusive",
              static_cast<unsigned long long>(survivors1), static_cast<unsigned long long>(missing1),
              static_cast<unsigned long long>(survivors2), static_cast<unsigned long long>(found2),
              static_cast<unsigned long long>(none2), static_cast<unsigned long long>(inconclusive2))};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> fn;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "exact conservation", criterion1},
      {2, "visit identity", criterion2},
      {3, "reference-step equivalence", criterion3},
      {4, "oriented 1D exact law", criterion4},
      {5, "finite-size parking probabilities", criterion5},
      {6, "recursion residual", criterion6},
      {7, "monotone coupling", criterion7},
      {8, "second-moment bound", criterion8},
      {9, "linear growth above 1/2", criterion9},
      {10, "power-law slopes", criterion10},
      {11, "threshold constants", criterion11},
      {12, "busy witnesses", criterion12},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::stoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %2d %s: %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), secs);
    std::fflush(stdout);
    if (!v.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
