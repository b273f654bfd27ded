// Command-line front end. Results go to stdout as JSON; diagnostics and
// progress go to stderr. Exit codes: 0 ok, 1 invalid input or I/O failure,
// 2 a check failed, 3 a resource budget was exceeded.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "parking/commands.hpp"
#include "parking/config.hpp"
#include "parking/engine.hpp"
#include "parking/io.hpp"
#include "parking/oracles.hpp"
#include "parking/stats.hpp"
#include "parking/verify.hpp"

using nlohmann::json;
using namespace parking;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitCheckFailed = 2;
constexpr int kExitBudget = 3;

// Flags that may override config-file values.
struct RunFlags {
  std::string config_path;
  std::optional<std::string> family, boundary, output_dir;
  std::optional<std::uint32_t> dimension, side;
  std::optional<double> p, work_budget;
  std::vector<double> p_grid;
  std::optional<std::uint64_t> seed, t_max, t_cap, snapshot_every;
  std::vector<std::uint64_t> seeds, snapshot_times, window;
  std::optional<std::size_t> replicas;
  std::optional<unsigned> workers;
  bool absorb{false}, no_nearest{false}, trajectories{false};
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON run config; flags override its values");
  cmd->add_option("--family", f.family, "unoriented_torus|oriented_torus|path|cycle|oriented_cycle");
  cmd->add_option("--dimension", f.dimension, "lattice dimension");
  cmd->add_option("--side", f.side, "side length L");
  cmd->add_option("--boundary", f.boundary, "periodic|reflecting (path only)");
  cmd->add_option("--p", f.p, "car density");
  cmd->add_option("--p-grid", f.p_grid, "car densities for a sweep")->delimiter(',');
  cmd->add_option("--seed", f.seed, "base seed; generated when omitted");
  cmd->add_option("--seeds", f.seeds, "explicit replica seeds")->delimiter(',');
  cmd->add_option("--t-max", f.t_max, "number of steps");
  cmd->add_option("--t-cap", f.t_cap, "step cap when running to absorption");
  cmd->add_flag("--absorb", f.absorb, "run until no unparked car remains (or t_cap)");
  cmd->add_option("--replicas", f.replicas, "replicas per p");
  cmd->add_option("--workers", f.workers, "worker threads");
  cmd->add_flag("--no-nearest", f.no_nearest, "skip nearest-type fractions");
  cmd->add_flag("--trajectories", f.trajectories, "log car trajectories");
  cmd->add_option("--snapshot-times", f.snapshot_times, "times to dump snapshots")->delimiter(',');
  cmd->add_option("--snapshot-every", f.snapshot_every, "dump a snapshot every k steps");
  cmd->add_option("--output-dir", f.output_dir, "directory for output files");
  cmd->add_option("--window", f.window, "regression window t_lo t_hi")->expected(2);
  cmd->add_option("--work-budget", f.work_budget, "max vertices x steps");
}

json merged_config_json(const RunFlags& f) {
  json j = json::object();
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw ConfigError("cannot open config file: " + f.config_path);
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
  }
  json& topo = j["topology"];
  if (topo.is_null()) topo = json::object();
  if (f.family) topo["family"] = *f.family;
  if (f.dimension) topo["dimension"] = *f.dimension;
  if (f.side) topo["side"] = *f.side;
  if (f.boundary) topo["boundary"] = *f.boundary;
  if (f.p) {
    j.erase("p_grid");
    j["p"] = *f.p;
  }
  if (!f.p_grid.empty()) {
    j.erase("p");
    j["p_grid"] = f.p_grid;
  }
  if (f.seed) {
    j.erase("seeds");
    j["seed"] = *f.seed;
  }
  if (!f.seeds.empty()) {
    j.erase("seed");
    j["seeds"] = f.seeds;
  }
  if (f.t_max) j["t_max"] = *f.t_max;
  if (f.t_cap) j["t_cap"] = *f.t_cap;
  if (f.absorb) j["run_to_absorption"] = true;
  if (f.replicas) j["replicas"] = *f.replicas;
  if (f.workers) j["workers"] = *f.workers;
  if (f.no_nearest) j["track_nearest"] = false;
  if (f.trajectories) j["record_trajectories"] = true;
  if (!f.snapshot_times.empty()) j["snapshot_times"] = f.snapshot_times;
  if (f.snapshot_every) j["snapshot_every"] = *f.snapshot_every;
  if (f.output_dir) j["output_dir"] = *f.output_dir;
  if (!f.window.empty()) j["window"] = f.window;
  if (f.work_budget) j["work_budget"] = *f.work_budget;
  return j;
}

RunConfig config_from_flags(const RunFlags& f) {
  RunConfig cfg = parse_run_config(merged_config_json(f));
  if (!cfg.seed && cfg.seeds.empty()) {
    std::random_device rd;
    const std::uint64_t generated = (static_cast<std::uint64_t>(rd()) << 32) | rd();
    std::cerr << "generated seed: " << generated << '\n';
    cfg = resolve_seed(std::move(cfg), generated);
  }
  return cfg;
}

void print(const json& j) { std::cout << io::dump_json(j); }

void progress_line(const std::string& line) { std::cerr << line << '\n'; }

int run_command(const RunFlags& flags, bool is_sweep) {
  const RunConfig cfg = config_from_flags(flags);
  const auto result = is_sweep ? sweep(cfg, progress_line) : simulate(cfg, progress_line);
  write_outputs(result, cfg.output_dir);
  print(result.summary);
  return result.checks_passed ? kExitOk : kExitCheckFailed;
}

oracles::Rational parse_rational(const std::string& text) {
  try {
    if (text.find('/') != std::string::npos) return oracles::Rational(text);
    const auto dot = text.find('.');
    if (dot == std::string::npos) return oracles::Rational(text);
    const std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    oracles::Rational scale = 1;
    for (std::size_t i = dot + 1; i < text.size(); ++i) scale *= 10;
    return oracles::Rational(boost::multiprecision::cpp_int(digits)) / scale;
  } catch (const std::exception&) {
    throw std::invalid_argument("not a rational number: " + text);
  }
}

json oracle_record(const std::string& op, json params, json result) {
  return {{"operation", op}, {"parameters", std::move(params)}, {"result", std::move(result)}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parking process simulator and exact oracles"};
  app.require_subcommand(1);
  int exit_code = kExitOk;

  RunFlags sim_flags, sweep_flags;
  auto* sim = app.add_subcommand("simulate", "run one simulation and write series, summary and snapshots");
  add_run_flags(sim, sim_flags);
  sim->callback([&] { exit_code = run_command(sim_flags, false); });

  auto* sw = app.add_subcommand("sweep", "run every (p, replica) pair of a density grid");
  add_run_flags(sw, sweep_flags);
  sw->callback([&] { exit_code = run_command(sweep_flags, true); });

  std::string suite;
  unsigned verify_workers = 1;
  auto* ver = app.add_subcommand("verify", "run an oracle or invariant suite");
  ver->add_option("suite", suite, "suite name or 'all'")->required();
  ver->add_option("--workers", verify_workers, "worker threads");
  ver->callback([&] {
    const auto report = run_verify_suite(suite, verify_workers);
    print(report);
    exit_code = report["passed"].get<bool>() ? kExitOk : kExitCheckFailed;
  });

  RunFlags couple_flags;
  double p_low = 0, p_high = 0;
  auto* cpl = app.add_subcommand("couple", "run the monotone coupling of two densities");
  cpl->add_option("--family", couple_flags.family)->required();
  cpl->add_option("--dimension", couple_flags.dimension);
  cpl->add_option("--side", couple_flags.side)->required();
  cpl->add_option("--boundary", couple_flags.boundary);
  cpl->add_option("--p-low", p_low)->required();
  cpl->add_option("--p-high", p_high)->required();
  cpl->add_option("--seed", couple_flags.seed)->required();
  cpl->add_option("--t-max", couple_flags.t_max)->required();
  cpl->callback([&] {
    json topo{{"family", *couple_flags.family}, {"side", *couple_flags.side}};
    if (couple_flags.dimension) topo["dimension"] = *couple_flags.dimension;
    if (couple_flags.boundary) topo["boundary"] = *couple_flags.boundary;
    const auto spec = topology_from_json(topo);
    const auto rep = couple_run(std::make_shared<const Topology>(spec), p_low, p_high,
                                *couple_flags.seed, *couple_flags.t_max);
    json violations = json::array();
    for (const auto& v : rep.violations) {
      violations.push_back({{"kind", to_string(v.kind)}, {"t", v.t}, {"vertex", v.vertex},
                            {"low", v.low}, {"high", v.high}});
    }
    print({{"topology", to_json(spec)}, {"p_low", rep.p_low}, {"p_high", rep.p_high},
           {"seed", rep.seed}, {"t_max", rep.t_max}, {"cars_compared", rep.cars_compared},
           {"visit_comparisons", rep.visit_comparisons}, {"violation_count", rep.violation_count},
           {"violations", violations}, {"identical_trajectories", rep.identical_trajectories},
           {"passed", rep.ok()}});
    exit_code = rep.ok() ? kExitOk : kExitCheckFailed;
  });

  std::string series_path;
  std::vector<std::uint64_t> fit_window;
  bool linear = false;
  auto* fit = app.add_subcommand("fit", "regress Vbar_t from a series CSV");
  fit->add_option("--series", series_path, "series.csv written by simulate")->required();
  fit->add_option("--window", fit_window, "t_lo t_hi")->expected(2);
  fit->add_flag("--linear", linear, "fit Vbar on t instead of log Vbar on log t");
  fit->callback([&] {
    std::ifstream in(series_path);
    if (!in) throw io::IoError("cannot open " + series_path);
    const auto file = io::read_series_csv(in);
    stats::Window w;
    if (fit_window.size() == 2) {
      w = {fit_window[0], fit_window[1]};
    } else {
      w = stats::default_window(topology_from_json(file.config.at("topology")));
    }
    const auto f = linear ? stats::fit_linear(file.rows, w) : stats::fit_power_law(file.rows, w);
    print({{"config", file.config}, {"fit", {{"window", {w.t_lo, w.t_hi}},
                                             {"model", linear ? "vbar_on_t" : "log_vbar_on_log_t"},
                                             {"slope", f.slope}, {"intercept", f.intercept},
                                             {"points", f.points}, {"rss", f.rss}}}});
  });

  auto* oracle = app.add_subcommand("oracle", "exact and closed-form computations");
  oracle->require_subcommand(1);

  std::uint32_t rm_t = 0;
  double rm_q = 0.5;
  std::string rm_q_exact;
  auto* rm = oracle->add_subcommand("running-max", "law of the running maximum of a +-1 walk");
  rm->add_option("--t", rm_t)->required();
  rm->add_option("--q", rm_q, "up-step probability");
  rm->add_option("--exact", rm_q_exact, "rational q; uses the exact (position, max) recursion");
  rm->callback([&] {
    if (!rm_q_exact.empty()) {
      const auto q = parse_rational(rm_q_exact);
      const auto dist = oracles::running_max_dist_exact(rm_t, q);
      std::vector<std::string> probs;
      for (const auto& x : dist) probs.push_back(x.str());
      print(oracle_record("running-max", {{"t", rm_t}, {"q", q.str()}},
                          {{"mean", oracles::mean_of(dist).str()}, {"distribution", probs}}));
      return;
    }
    const auto d = oracles::running_max_dist(rm_t, rm_q);
    std::vector<double> probs(d.probabilities.begin(), d.probabilities.end());
    print(oracle_record("running-max", {{"t", rm_t}, {"q", rm_q}},
                        {{"mean", static_cast<double>(d.mean)},
                         {"variance", static_cast<double>(d.variance)},
                         {"distribution", probs}}));
  });

  std::uint32_t o1_L = 0, o1_t = 0;
  std::string o1_p;
  auto* o1 = oracle->add_subcommand("oriented1d", "exhaustive enumeration on the oriented cycle");
  o1->add_option("--L", o1_L)->required();
  o1->add_option("--t", o1_t)->required();
  o1->add_option("--p", o1_p, "density as a decimal or a/b")->required();
  o1->callback([&] {
    const auto p = parse_rational(o1_p);
    const auto r = oracles::oriented1d_exact(o1_L, o1_t, p);
    std::vector<std::string> probs;
    for (const auto& x : r.distribution) probs.push_back(x.str());
    print(oracle_record("oriented1d", {{"L", o1_L}, {"t", o1_t}, {"p", p.str()}},
                        {{"mean", r.mean.str()}, {"mean_decimal", static_cast<double>(r.mean)},
                         {"distribution", probs}}));
  });

  std::string et_family, et_mode = "exact";
  std::uint32_t et_dim = 1, et_radius = 1;
  std::uint64_t et_samples = 100000, et_seed = 1;
  auto* et = oracle->add_subcommand("exit-time", "expected exit time from a ball");
  et->add_option("--family", et_family)->required();
  et->add_option("--dimension", et_dim);
  et->add_option("--radius", et_radius)->required();
  et->add_option("--mode", et_mode, "exact|monte_carlo");
  et->add_option("--samples", et_samples);
  et->add_option("--seed", et_seed);
  et->callback([&] {
    const auto family = family_from_string(et_family);
    if (et_mode != "exact" && et_mode != "monte_carlo") throw std::invalid_argument("unknown mode: " + et_mode);
    const auto mode = et_mode == "exact" ? oracles::ExitMode::ExactDP : oracles::ExitMode::MonteCarlo;
    const auto r = oracles::exit_time_mean(family, et_dim, et_radius, mode, et_samples, et_seed);
    json params{{"family", et_family}, {"dimension", et_dim}, {"radius", et_radius}, {"mode", et_mode}};
    if (mode == oracles::ExitMode::MonteCarlo) {
      params["samples"] = et_samples;
      params["seed"] = et_seed;
    }
    print(oracle_record("exit-time", params,
                        {{"mean", r.mean}, {"standard_error", r.standard_error}, {"samples", r.samples}}));
  });

  std::string fp_family;
  std::uint32_t fp_dim = 1, fp_jmax = 50;
  double fp_s = 0;
  auto* fp = oracle->add_subcommand("f-partial", "partial sums of sum_j E t(j) s^j");
  fp->add_option("--family", fp_family)->required();
  fp->add_option("--dimension", fp_dim);
  fp->add_option("--s", fp_s)->required();
  fp->add_option("--j-max", fp_jmax);
  fp->callback([&] {
    const auto r = oracles::f_partial(family_from_string(fp_family), fp_dim, fp_s, fp_jmax);
    print(oracle_record("f-partial",
                        {{"family", fp_family}, {"dimension", fp_dim}, {"s", fp_s}, {"j_max", fp_jmax}},
                        {{"terms", r.terms}, {"partial_sums", r.partial_sums},
                         {"last_term", r.last_term}, {"apparent_divergence", r.apparent_divergence}}));
  });

  std::optional<std::uint32_t> th_degree, th_dim;
  std::optional<double> th_kmin, th_p;
  std::optional<std::string> th_family;
  auto* th = oracle->add_subcommand("threshold", "small-density threshold from (max degree, K_min)");
  th->add_option("--max-degree", th_degree);
  th->add_option("--k-min", th_kmin);
  th->add_option("--family", th_family, "take max degree and K_min from this family instead");
  th->add_option("--dimension", th_dim);
  th->add_option("--p", th_p, "also report s_p and whether p is below the threshold");
  th->callback([&] {
    json params;
    std::uint32_t degree = 0;
    double kmin = 0;
    if (th_family) {
      const std::uint32_t d = th_dim.value_or(1);
      const auto ks = build_topology({family_from_string(*th_family), d, 5, Boundary::Periodic}).kernel_stats();
      degree = ks.max_degree;
      kmin = ks.k_min;
      params = {{"family", *th_family}, {"dimension", d}};
    } else {
      if (!th_degree || !th_kmin) throw std::invalid_argument("give --family or both --max-degree and --k-min");
      degree = *th_degree;
      kmin = *th_kmin;
    }
    params["max_degree"] = degree;
    params["k_min"] = kmin;
    const auto r = oracles::small_p_threshold(degree, kmin);
    json result{{"c", r.c}, {"p_star", r.p_star}, {"root_bounds_ok", r.root_bounds_ok}};
    if (th_p) {
      params["p"] = *th_p;
      result["s_p"] = r.s_p(*th_p);
      result["guaranteed_finite"] = r.guaranteed_finite(*th_p);
    }
    print(oracle_record("threshold", params, result));
  });

  std::uint32_t bb_j = 1;
  std::string bb_p;
  auto* bb = oracle->add_subcommand("binomial-busy", "exact tail against the Chernoff bound");
  bb->add_option("--j", bb_j)->required();
  bb->add_option("--p", bb_p, "density as a decimal or a/b")->required();
  bb->callback([&] {
    const auto p = parse_rational(bb_p);
    const auto r = oracles::binomial_busy(bb_j, static_cast<double>(p));
    print(oracle_record("binomial-busy", {{"j", bb_j}, {"p", p.str()}},
                        {{"exact", r.exact}, {"chernoff", r.chernoff},
                         {"tail_exact", oracles::binomial_busy_tail_exact(bb_j, p).str()},
                         {"holds", oracles::binomial_busy_holds_exact(bb_j, p)}}));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  } catch (const BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return exit_code;
}
