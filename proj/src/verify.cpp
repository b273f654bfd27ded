#include "parking/verify.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>

#include "parking/engine.hpp"
#include "parking/oracles.hpp"
#include "parking/parallel.hpp"
#include "parking/stats.hpp"

namespace parking {

using nlohmann::json;
using oracles::Rational;

namespace {

class Report {
 public:
  void check(const std::string& name, json expected, json actual, json tolerance, bool passed) {
    checks_.push_back({{"name", name},
                       {"expected", std::move(expected)},
                       {"actual", std::move(actual)},
                       {"tolerance", std::move(tolerance)},
                       {"passed", passed}});
    passed_ = passed_ && passed;
  }
  void close(const std::string& name, double expected, double actual, double rel_tol) {
    const bool ok = std::abs(actual - expected) <= rel_tol * std::abs(expected);
    check(name, expected, actual, json{{"relative", rel_tol}}, ok);
  }
  void exact(const std::string& name, json expected, json actual) {
    const bool ok = expected == actual;
    check(name, expected, actual, 0, ok);
  }
  json finish(const std::string& suite) const {
    return {{"suite", suite}, {"passed", passed_}, {"checks", checks_}};
  }

 private:
  json checks_ = json::array();
  bool passed_ = true;
};

struct Instance {
  std::shared_ptr<const Topology> topology;
  double p;
  std::uint64_t seed;
  std::uint64_t steps;
};

// Small random instances over every family, drawn from a fixed seed.
Instance random_instance(std::size_t i) {
  const RandomnessSource src(0x5eed0000 + i);
  auto u = [&](std::uint64_t k) { return src.draw(Purpose::Role, i, k); };
  TopologySpec spec;
  switch (i % 5) {
    case 0: spec = {Family::UnorientedTorus, 2, 3 + static_cast<std::uint32_t>(u(1) * 8), Boundary::Periodic}; break;
    case 1: spec = {Family::OrientedTorus, 2, 3 + static_cast<std::uint32_t>(u(1) * 8), Boundary::Periodic}; break;
    case 2: spec = {Family::Cycle1D, 1, 3 + static_cast<std::uint32_t>(u(1) * 40), Boundary::Periodic}; break;
    case 3: spec = {Family::Path1D, 1, 2 + static_cast<std::uint32_t>(u(1) * 40), Boundary::Reflecting}; break;
    default: spec = {Family::OrientedCycle1D, 1, 3 + static_cast<std::uint32_t>(u(1) * 40), Boundary::Periodic}; break;
  }
  return {std::make_shared<const Topology>(spec), u(2), derive_seed(0xc0ffee, i),
          10 + static_cast<std::uint64_t>(u(3) * 40)};
}

json suite_thresholds() {
  Report r;
  const auto z2 = build_topology({Family::UnorientedTorus, 2, 9, Boundary::Periodic}).kernel_stats();
  const auto z2o = build_topology({Family::OrientedTorus, 2, 9, Boundary::Periodic}).kernel_stats();
  const auto un = oracles::small_p_threshold(z2.max_degree, z2.k_min);
  const auto ori = oracles::small_p_threshold(z2o.max_degree, z2o.k_min);
  const double e2 = std::exp(-2.0);
  r.close("unoriented_z2_c", std::ldexp(e2, -14), un.c, 1e-12);
  r.close("oriented_z2_c", std::ldexp(e2, -10), ori.c, 1e-12);
  r.check("unoriented_z2_root_bounds", true, un.root_bounds_ok, nullptr, un.root_bounds_ok);
  r.check("oriented_z2_root_bounds", true, ori.root_bounds_ok, nullptr, ori.root_bounds_ok);
  for (std::uint32_t d = 1; d <= 4; ++d) {
    const auto su = build_topology({Family::UnorientedTorus, d, 5, Boundary::Periodic}).kernel_stats();
    const auto so = build_topology({Family::OrientedTorus, d, 5, Boundary::Periodic}).kernel_stats();
    r.close("unoriented_closed_form_d" + std::to_string(d), oracles::lattice_threshold(d, false),
            oracles::small_p_threshold(su.max_degree, su.k_min).c, 1e-12);
    r.close("oriented_closed_form_d" + std::to_string(d), oracles::lattice_threshold(d, true),
            oracles::small_p_threshold(so.max_degree, so.k_min).c, 1e-12);
  }
  std::size_t violations = 0;
  for (std::uint32_t k = 1; k <= 99; ++k) {
    for (std::uint32_t j = 1; j <= 100; ++j) {
      if (!oracles::binomial_busy_holds_exact(j, Rational(k, 200))) ++violations;
    }
  }
  r.exact("chernoff_busy_bound_violations", 0, violations);
  return r.finish("thresholds");
}

json suite_conservation(unsigned workers) {
  Report r;
  constexpr std::size_t kRuns = 100;
  std::vector<std::uint64_t> failures(kRuns, 0);
  parallel_for(kRuns, workers, [&](std::size_t i) {
    const auto inst = random_instance(i);
    const RandomnessSource src(inst.seed);
    SimState s(inst.topology, sample_initial(*inst.topology, inst.p, src));
    for (std::uint64_t t = 0; t < inst.steps; ++t) {
      step(s, src);
      if (!conservation_check(s).ok()) ++failures[i];
    }
  });
  std::uint64_t total = 0;
  for (auto f : failures) total += f;
  r.exact("runs", kRuns, failures.size());
  r.exact("failed_steps", 0, total);
  return r.finish("conservation");
}

json suite_visit_identity(unsigned workers) {
  Report r;
  constexpr std::size_t kRuns = 100;
  std::vector<std::uint64_t> identity_failures(kRuns, 0);
  std::vector<double> worst_residual(kRuns, 0.0);
  parallel_for(kRuns, workers, [&](std::size_t i) {
    const auto inst = random_instance(i);
    const RandomnessSource src(inst.seed);
    SimState s(inst.topology, sample_initial(*inst.topology, inst.p, src));
    const double n = s.vertex_count();
    const double p_hat = s.n_cars() / n;
    for (std::uint64_t t = 0; t < inst.steps; ++t) {
      const double before = s.total_visits() / n;
      const double unvisited = s.unvisited_spots() / n;
      step(s, src);
      if (!visit_identity_check(s).holds()) ++identity_failures[i];
      // The step increment of Vbar is exactly (2 p_hat - 1) + unvisited fraction.
      const double residual = (s.total_visits() / n - before) - (2 * p_hat - 1) - unvisited;
      worst_residual[i] = std::max(worst_residual[i], std::abs(residual));
    }
  });
  std::uint64_t total = 0;
  double worst = 0;
  for (std::size_t i = 0; i < kRuns; ++i) {
    total += identity_failures[i];
    worst = std::max(worst, worst_residual[i]);
  }
  r.exact("visit_identity_failed_steps", 0, total);
  r.check("pathwise_recursion_max_residual", 0.0, worst, 1e-12, worst <= 1e-12);
  return r.finish("visit_identity");
}

json suite_coupling(unsigned workers) {
  Report r;
  constexpr std::size_t kPairs = 200;
  std::vector<std::uint64_t> violations(kPairs, 0);
  parallel_for(kPairs, workers, [&](std::size_t i) {
    const auto inst = random_instance(i);
    const RandomnessSource src(inst.seed);
    const double a = src.draw(Purpose::Tie, i, 1), b = src.draw(Purpose::Tie, i, 2);
    violations[i] = couple_run(inst.topology, std::min(a, b), std::max(a, b), inst.seed, inst.steps)
                        .violation_count;
  });
  std::uint64_t total = 0;
  for (auto v : violations) total += v;
  r.exact("pairs", kPairs, violations.size());
  r.exact("monotonicity_violations", 0, total);
  return r.finish("coupling");
}

json suite_reference(unsigned workers) {
  Report r;
  constexpr std::size_t kRuns = 100;
  std::vector<std::uint64_t> mismatches(kRuns, 0);
  parallel_for(kRuns, workers, [&](std::size_t i) {
    const auto inst = random_instance(i);
    const RandomnessSource src(inst.seed);
    const auto init = sample_initial(*inst.topology, inst.p, src);
    for (auto order : {IterationOrder::Forward, IterationOrder::Reversed}) {
      SimState fast(inst.topology, init, true), slow(inst.topology, init, true);
      for (std::uint64_t t = 0; t < inst.steps; ++t) {
        step(fast, src, order);
        oracles::reference_step(slow, src, order);
        if (!(fast == slow)) ++mismatches[i];
      }
    }
  });
  std::uint64_t total = 0;
  for (auto m : mismatches) total += m;
  r.exact("mismatched_steps", 0, total);
  return r.finish("reference");
}

json suite_oriented1d() {
  Report r;
  // Exact: E V_t(0) over all 2^L configurations, run through the engine and
  // weighted by p^k (1-p)^(L-k), against the independent enumeration.
  constexpr std::uint32_t L = 12, T = 5;
  const Rational p(2, 5);
  auto topology = std::make_shared<const Topology>(
      TopologySpec{Family::OrientedCycle1D, 1, L, Boundary::Periodic});
  std::vector<Rational> engine_mean(T + 1, Rational(0));
  const RandomnessSource src(1);
  for (std::uint32_t mask = 0; mask < (1u << L); ++mask) {
    std::vector<Role> roles(L);
    std::uint32_t k = 0;
    for (std::uint32_t v = 0; v < L; ++v) {
      roles[v] = (mask >> v) & 1u ? Role::Car : Role::Spot;
      k += (mask >> v) & 1u;
    }
    Rational weight = 1;
    for (std::uint32_t i = 0; i < k; ++i) weight *= p;
    for (std::uint32_t i = k; i < L; ++i) weight *= 1 - p;
    SimState s(topology, config_from_roles(roles));
    for (std::uint32_t t = 1; t <= T; ++t) {
      step(s, src);
      engine_mean[t] += weight * Rational(s.visits(0));
    }
  }
  for (std::uint32_t t = 1; t <= T; ++t) {
    const auto oracle = oracles::oriented1d_exact(L, t, p).mean;
    r.check("exact_mean_t" + std::to_string(t), oracle.str(), engine_mean[t].str(), 0,
            oracle == engine_mean[t]);
  }
  r.exact("closed_form_t1", p.str(), oracles::oriented1d_exact(L, 1, p).mean.str());
  r.exact("closed_form_t2", Rational(p + p * p).str(), oracles::oriented1d_exact(L, 2, p).mean.str());

  // Monte Carlo: site average on a long cycle at p = 1/2 within 4 standard errors.
  constexpr std::uint32_t kLong = 20000, kT = 8, kBlock = 100;
  const auto oracle = static_cast<double>(oracles::oriented1d_mean(20, kT, 0.5));
  auto big = std::make_shared<const Topology>(
      TopologySpec{Family::OrientedCycle1D, 1, kLong, Boundary::Periodic});
  const auto series = run(big, 0.5, 2024, kT, RunOptions{.keep_final_state = true});
  std::vector<double> blocks;
  for (std::uint32_t b = 0; b < kLong / kBlock; ++b) {
    double sum = 0;
    for (std::uint32_t v = b * kBlock; v < (b + 1) * kBlock; ++v) sum += series.final_state->visits(v);
    blocks.push_back(sum / kBlock);
  }
  const auto est = stats::estimate_mean(blocks);
  const double z = std::abs(est.mean - oracle) / est.standard_error;
  r.check("monte_carlo_mean_t8", oracle, est.mean, json{{"standard_errors", 4}}, z <= 4);
  return r.finish("oriented1d");
}

json suite_running_max() {
  Report r;
  for (const auto& q : {Rational(1, 2), Rational(1, 3), Rational(3, 4)}) {
    const std::uint32_t t = 60;
    const auto exact = oracles::running_max_dist_exact(t, q);
    const auto fast = oracles::running_max_dist(t, static_cast<double>(q));
    double worst = 0;
    for (std::size_t m = 0; m < exact.size(); ++m) {
      const double f = m < fast.probabilities.size() ? static_cast<double>(fast.probabilities[m]) : 0.0;
      worst = std::max(worst, std::abs(static_cast<double>(exact[m]) - f));
    }
    r.check("law_agreement_q" + q.str(), 0.0, worst, 1e-12, worst <= 1e-12);
  }
  const auto d = oracles::running_max_dist(10000, 0.5);
  const double ratio = static_cast<double>(d.mean) / std::sqrt(20000.0 / M_PI);
  r.check("mean_t10000_over_sqrt_2t_over_pi", 1.0, ratio, 0.01, std::abs(ratio - 1.0) <= 0.01);
  return r.finish("running_max");
}

json suite_busy() {
  Report r;
  std::uint64_t checked = 0, missing = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto topology = std::make_shared<const Topology>(
        TopologySpec{Family::Cycle1D, 1, 400, Boundary::Periodic});
    constexpr std::uint64_t T = 30;
    RunOptions options;
    options.record_trajectories = true;
    options.keep_final_state = true;
    const auto series = run(topology, 0.5, seed, T, options);
    const auto& s = *series.final_state;
    for (std::uint32_t c : s.unparked_indices()) {
      ++checked;
      const auto& car = s.cars()[c];
      if (!stats::busy_witness_1d(*topology, s.roles(), s.trajectory(c), car.origin, T)) ++missing;
    }
  }
  r.check("unparked_cars_checked", ">0", checked, nullptr, checked > 0);
  r.exact("unparked_without_witness_1d", 0, missing);

  std::uint64_t checked2 = 0, missing2 = 0, inconclusive = 0;
  auto torus = std::make_shared<const Topology>(
      TopologySpec{Family::UnorientedTorus, 2, 30, Boundary::Periodic});
  RunOptions options;
  options.record_trajectories = true;
  options.keep_final_state = true;
  constexpr std::uint64_t T = 3;
  const auto series = run(torus, 0.5, 7, T, options);
  const auto& s = *series.final_state;
  for (std::uint32_t c : s.unparked_indices()) {
    if (checked2 == 100) break;
    ++checked2;
    const auto res = stats::busy_witness_search(*torus, s.roles(), s.trajectory(c), s.cars()[c].origin,
                                                T, 1'000'000);
    if (res.outcome == stats::SearchOutcome::None) ++missing2;
    if (res.outcome == stats::SearchOutcome::Inconclusive) ++inconclusive;
  }
  r.exact("unparked_without_witness_2d", 0, missing2);
  r.check("inconclusive_2d_searches", "reported", inconclusive, nullptr, true);
  return r.finish("busy");
}

using Suite = std::function<json(unsigned)>;

const std::map<std::string, Suite>& suites() {
  static const std::map<std::string, Suite> table{
      {"thresholds", [](unsigned) { return suite_thresholds(); }},
      {"conservation", suite_conservation},
      {"visit_identity", suite_visit_identity},
      {"coupling", suite_coupling},
      {"reference", suite_reference},
      {"oriented1d", [](unsigned) { return suite_oriented1d(); }},
      {"running_max", [](unsigned) { return suite_running_max(); }},
      {"busy", [](unsigned) { return suite_busy(); }},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& verify_suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, fn] : suites()) out.push_back(name);
    return out;
  }();
  return names;
}

json run_verify_suite(const std::string& name, unsigned workers) {
  if (name == "all") {
    json all{{"suite", "all"}, {"passed", true}, {"suites", json::array()}};
    for (const auto& [suite, fn] : suites()) {
      auto result = fn(workers);
      all["passed"] = all["passed"].get<bool>() && result["passed"].get<bool>();
      all["suites"].push_back(std::move(result));
    }
    return all;
  }
  const auto it = suites().find(name);
  if (it == suites().end()) throw std::invalid_argument("unknown verify suite: " + name);
  return it->second(workers);
}

}  // namespace parking
