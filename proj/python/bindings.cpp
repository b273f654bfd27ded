#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <memory>
#include <string>

#include "parking/commands.hpp"
#include "parking/config.hpp"
#include "parking/engine.hpp"
#include "parking/oracles.hpp"
#include "parking/stats.hpp"
#include "parking/verify.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace parking;

namespace {

// Structured values cross the boundary as JSON text; the Python wrapper
// decodes them. Rationals travel as "a/b" strings.

std::shared_ptr<const Topology> topology_of(const std::string& spec_json) {
  return std::make_shared<const Topology>(topology_from_json(json::parse(spec_json)));
}

json series_json(const SimSeries& s) {
  json cols = {{"t", json::array()},           {"vbar", json::array()},
               {"vbar_sq", json::array()},     {"unparked_cars", json::array()},
               {"vacant_spots", json::array()}, {"frac_spot_unvisited", json::array()},
               {"frac_closer_spot", json::array()}, {"frac_closer_car", json::array()},
               {"frac_tie", json::array()}};
  for (const auto& r : s.rows) {
    cols["t"].push_back(r.t);
    cols["vbar"].push_back(r.vbar);
    cols["vbar_sq"].push_back(r.vbar_sq);
    cols["unparked_cars"].push_back(r.unparked_cars);
    cols["vacant_spots"].push_back(r.vacant_spots);
    cols["frac_spot_unvisited"].push_back(r.frac_spot_unvisited);
    cols["frac_closer_spot"].push_back(r.frac_closer_spot);
    cols["frac_closer_car"].push_back(r.frac_closer_car);
    cols["frac_tie"].push_back(r.frac_tie);
  }
  auto opt = [](const std::optional<std::uint64_t>& v) { return v ? json(*v) : json(nullptr); };
  return {{"topology", to_json(s.topology)}, {"p", s.p}, {"seed", s.seed},
          {"n_vertices", s.n_vertices}, {"n_cars", s.n_cars}, {"n_spots", s.n_spots},
          {"parked_cars", s.parked_cars}, {"saturation_time", opt(s.saturation_time)},
          {"absorption_time", opt(s.absorption_time)}, {"rows", cols}};
}

std::pair<std::string, std::map<std::string, std::string>> command_result(const CommandResult& r) {
  std::map<std::string, std::string> files;
  for (const auto& f : r.files) files[f.name] = f.content;
  return {r.summary.dump(), files};
}

RunConfig seeded_config(const std::string& config_json, std::uint64_t fallback_seed) {
  return resolve_seed(parse_run_config(json::parse(config_json)), fallback_seed);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Parking process simulator and exact oracles (compiled core)";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<BudgetExceeded>(m, "BudgetExceeded", PyExc_RuntimeError);

  py::class_<Topology, std::shared_ptr<Topology>>(m, "Topology")
      .def(py::init([](const std::string& spec_json) {
        return std::make_shared<Topology>(topology_from_json(json::parse(spec_json)));
      }))
      .def_property_readonly("vertex_count", &Topology::vertex_count)
      .def_property_readonly("dimension", &Topology::dimension)
      .def_property_readonly("side", &Topology::side)
      .def("neighbors",
           [](const Topology& t, Vertex v) {
             std::vector<std::pair<Vertex, double>> out;
             for (const auto& n : t.neighbors(v)) out.emplace_back(n.vertex, n.weight);
             return out;
           })
      .def("coordinates", &Topology::coordinates)
      .def("distance", &Topology::distance)
      .def("ball", &Topology::ball)
      .def("kernel_stats", [](const Topology& t) {
        const auto k = t.kernel_stats();
        return py::dict(py::arg("max_degree") = k.max_degree, py::arg("k_min") = k.k_min,
                        py::arg("in_sums_ok") = k.in_sums_ok);
      });

  m.def("run", [](const std::string& topology, double p, std::uint64_t seed, std::uint64_t t_max,
                  bool track_nearest) {
    RunOptions o;
    o.track_nearest = track_nearest;
    py::gil_scoped_release release;
    return series_json(run(topology_of(topology), p, seed, t_max, o)).dump();
  });
  m.def("run_to_absorption", [](const std::string& topology, double p, std::uint64_t seed,
                                std::uint64_t t_cap) {
    py::gil_scoped_release release;
    return series_json(run_to_absorption(topology_of(topology), p, seed, t_cap).series).dump();
  });
  m.def("couple", [](const std::string& topology, double p_low, double p_high, std::uint64_t seed,
                     std::uint64_t t_max) {
    py::gil_scoped_release release;
    const auto r = couple_run(topology_of(topology), p_low, p_high, seed, t_max);
    return json{{"violation_count", r.violation_count}, {"cars_compared", r.cars_compared},
                {"visit_comparisons", r.visit_comparisons},
                {"identical_trajectories", r.identical_trajectories}}
        .dump();
  });

  m.def("simulate", [](const std::string& config, std::uint64_t fallback_seed) {
    const auto cfg = seeded_config(config, fallback_seed);
    py::gil_scoped_release release;
    return command_result(simulate(cfg));
  });
  m.def("sweep", [](const std::string& config, std::uint64_t fallback_seed) {
    const auto cfg = seeded_config(config, fallback_seed);
    py::gil_scoped_release release;
    return command_result(sweep(cfg));
  });
  m.def("verify", [](const std::string& suite, unsigned workers) {
    py::gil_scoped_release release;
    return run_verify_suite(suite, workers).dump();
  });
  m.def("verify_suite_names", &verify_suite_names);

  m.def("running_max", [](std::uint32_t t, double q) {
    const auto d = oracles::running_max_dist(t, q);
    std::vector<double> probs(d.probabilities.begin(), d.probabilities.end());
    return py::make_tuple(static_cast<double>(d.mean), static_cast<double>(d.variance), probs);
  });
  m.def("running_max_exact", [](std::uint32_t t, const std::string& q) {
    std::vector<std::string> out;
    for (const auto& x : oracles::running_max_dist_exact(t, oracles::Rational(q))) out.push_back(x.str());
    return out;
  });
  m.def("oriented1d", [](std::uint32_t L, std::uint32_t t, const std::string& p) {
    const auto r = oracles::oriented1d_exact(L, t, oracles::Rational(p));
    std::vector<std::string> dist;
    for (const auto& x : r.distribution) dist.push_back(x.str());
    return py::make_tuple(r.mean.str(), dist);
  });
  m.def("exit_time", [](const std::string& family, std::uint32_t dimension, std::uint32_t radius,
                        bool monte_carlo, std::uint64_t samples, std::uint64_t seed) {
    const auto r = oracles::exit_time_mean(family_from_string(family), dimension, radius,
                                           monte_carlo ? oracles::ExitMode::MonteCarlo : oracles::ExitMode::ExactDP,
                                           samples, seed);
    return py::make_tuple(r.mean, r.standard_error, r.samples);
  });
  m.def("f_partial", [](const std::string& family, std::uint32_t dimension, double s, std::uint32_t j_max) {
    const auto r = oracles::f_partial(family_from_string(family), dimension, s, j_max);
    return py::make_tuple(r.terms, r.partial_sums, r.apparent_divergence);
  });
  m.def("threshold", [](std::uint32_t max_degree, double k_min) {
    const auto r = oracles::small_p_threshold(max_degree, k_min);
    return py::make_tuple(r.c, r.p_star, r.root_bounds_ok);
  });
  m.def("lattice_threshold", &oracles::lattice_threshold);
  m.def("binomial_busy", [](std::uint32_t j, const std::string& p) {
    const oracles::Rational q(p);
    const auto b = oracles::binomial_busy(j, static_cast<double>(q));
    return py::make_tuple(oracles::binomial_busy_tail_exact(j, q).str(), b.chernoff,
                          oracles::binomial_busy_holds_exact(j, q));
  });
  m.def("fit_power_law", [](const std::vector<std::uint64_t>& t, const std::vector<double>& vbar,
                            std::uint64_t t_lo, std::uint64_t t_hi) {
    if (t.size() != vbar.size()) throw std::invalid_argument("t and vbar lengths differ");
    std::vector<ObservableRow> rows(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      rows[i].t = t[i];
      rows[i].vbar = vbar[i];
    }
    const auto f = stats::fit_power_law(rows, {t_lo, t_hi});
    return py::make_tuple(f.slope, f.intercept, f.rss, f.points);
  });
}
