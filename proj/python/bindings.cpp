#include "patrol/engine.hpp"
#include "patrol/errors.hpp"
#include "patrol/graph_builders.hpp"
#include "patrol/shared_knowledge.hpp"
#include "patrol/terrain.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace patrol;

namespace {

using Point = std::array<double, 3>;

Vec3 vec(const Point& p) { return {p[0], p[1], p[2]}; }
Point point(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

py::dict summary_dict(const RunSummary& s) {
  py::dict d;
  d["final_avg_idl"] = s.final_avg_idl;
  d["mean_avg_idl"] = s.mean_avg_idl;
  d["final_max_idl"] = s.final_max_idl;
  d["interference_total"] = s.interference_total;
  d["deadlock"] = s.deadlock;
  return d;
}

Scenario configured(const std::string& path, std::optional<std::string> strategy, std::optional<std::uint64_t> seed,
                    std::optional<double> duration, const std::map<std::string, double>& params) {
  Scenario sc = load_scenario(path);
  for (const auto& [k, v] : params) sc.params.set(k, v);
  if (strategy) sc.strategy = strategy_from_string(*strategy);
  if (seed) sc.seed = *seed;
  if (duration) sc.duration_s = *duration;
  prepare_scenario(sc);
  return sc;
}

std::vector<CsvRow> rows_from_text(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multi-robot patrolling simulator";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<GraphDisconnectedError>(m, "GraphDisconnectedError", PyExc_ValueError);
  py::register_exception<InvariantViolation>(m, "InvariantViolation", PyExc_RuntimeError);

  py::enum_<Strategy>(m, "Strategy")
      .value("CC", Strategy::CC)
      .value("CwMC", Strategy::CwMC)
      .value("NoCC", Strategy::NoCC)
      .def_static("parse", &strategy_from_string);

  py::class_<Params>(m, "Params")
      .def(py::init<>())
      .def("__getitem__", &Params::get)
      .def("__setitem__", &Params::set)
      .def("validate", &Params::validate)
      .def_static("names", &Params::names)
      .def("as_dict", [](const Params& p) {
        py::dict d;
        for (const auto& k : Params::names()) d[py::str(k)] = p.get(k);
        return d;
      });

  m.def("traversability_cost", &traversability_cost, py::arg("label_weight"), py::arg("clearance"),
        py::arg("density"), py::arg("roughness"));

  m.def(
      "mixed_step_cost",
      [](const Point& from, const Point& to, const Point& goal, double trav_to, double trav_min, double trav_max,
         double lambda_z, double lambda_t, double eps, double omega2) {
        return mixed_step_cost(vec(from), vec(to), vec(goal), trav_to, trav_min, trav_max, lambda_z, lambda_t, eps,
                               omega2);
      },
      py::arg("from_"), py::arg("to"), py::arg("goal"), py::arg("trav_to"), py::arg("trav_min"),
      py::arg("trav_max"), py::arg("lambda_z") = 2.0, py::arg("lambda_t") = 1.0, py::arg("eps") = 1e-6,
      py::arg("omega2") = 1.0);

  m.def(
      "synchronize_idleness",
      [](const std::vector<double>& local, const std::vector<double>& received) {
        const std::vector<double> w(local.size(), 1.0);
        return synchronize_idleness(IdlenessVector(0, local, w), IdlenessVector(1, received, w)).last_visits();
      },
      py::arg("local_last_visits"), py::arg("received_last_visits"),
      "Merge two last-visit vectors; the result keeps the most recent visit per node.");

  m.def(
      "detect_node_conflict",
      [](int self_id, int goal, double self_cost, const std::vector<std::tuple<int, int, double>>& teammates) {
        int n = self_id + 1;
        for (const auto& [id, g, c] : teammates) n = std::max(n, id + 1);
        TeamModel model(self_id, static_cast<std::size_t>(n));
        for (const auto& [id, g, c] : teammates) {
          model.entry(id).goal = g;
          model.entry(id).travel_cost = c;
        }
        const auto r = detect_node_conflict(self_id, goal, self_cost, model);
        return r.conflict ? std::optional<int>(r.contender) : std::nullopt;
      },
      py::arg("self_id"), py::arg("goal"), py::arg("self_cost"), py::arg("teammates"),
      "Teammates are (robot_id, goal, travel_cost); returns the winning teammate id or None.");

  m.def(
      "build_graph_from_trajectories",
      [](const std::vector<std::vector<Point>>& trajectories, double sample_step, double voxel_size) {
        std::vector<std::vector<Vec3>> traj;
        for (const auto& t : trajectories) {
          traj.emplace_back();
          for (const auto& p : t) traj.back().push_back(vec(p));
        }
        const auto g = build_from_trajectories(traj, sample_step, voxel_size);
        std::vector<Point> nodes;
        for (const auto& n : g.nodes()) nodes.push_back(point(n.position));
        std::vector<std::tuple<int, int, double>> edges;
        for (const auto& e : g.edges()) edges.emplace_back(e.i, e.j, e.travel_cost);
        return py::make_tuple(nodes, edges);
      },
      py::arg("trajectories"), py::arg("sample_step") = 1.0, py::arg("voxel_size") = 0.5);

  m.def(
      "load_scenario",
      [](const std::string& path) {
        const Scenario sc = load_scenario(path);
        py::dict d;
        d["name"] = sc.name;
        d["map"] = sc.map_path;
        d["graph"] = sc.graph_path;
        std::vector<Point> robots;
        for (const auto& r : sc.robots) robots.push_back(point(r));
        d["robots"] = robots;
        d["strategy"] = std::string(to_string(sc.strategy));
        d["duration_s"] = sc.duration_s;
        d["tick_s"] = sc.tick_s;
        d["seed"] = sc.seed;
        return d;
      },
      py::arg("path"));

  m.def(
      "run",
      [](const std::string& path, std::optional<std::string> strategy, std::optional<std::uint64_t> seed,
         std::optional<double> duration, const std::map<std::string, double>& params) {
        Scenario sc = configured(path, strategy, seed, duration, params);
        MetricsRecord rec;
        {
          py::gil_scoped_release release;
          Simulation sim(std::move(sc));
          rec = sim.run();
        }
        return py::make_tuple(summary_dict(summarize(rec.rows)), to_csv(rec.rows));
      },
      py::arg("scenario"), py::arg("strategy") = py::none(), py::arg("seed") = py::none(),
      py::arg("duration") = py::none(), py::arg("params") = std::map<std::string, double>{},
      "Run a scenario file; returns (summary dict, metrics CSV text).");

  m.def(
      "parse_csv",
      [](const std::string& text) {
        std::vector<py::tuple> out;
        for (const auto& r : rows_from_text(text)) out.push_back(py::make_tuple(r.t, r.node, r.event, r.robot, r.value));
        return out;
      },
      py::arg("text"), "Rows as (t, node, event, robot, value); node and robot may be None.");

  m.def(
      "summarize_csv", [](const std::string& text) { return summary_dict(summarize(rows_from_text(text))); },
      py::arg("text"));

  py::class_<Simulation>(m, "Simulation")
      .def(py::init([](const std::string& path, std::optional<std::string> strategy, std::optional<std::uint64_t> seed,
                       std::optional<double> duration, const std::map<std::string, double>& params) {
             return std::make_unique<Simulation>(configured(path, strategy, seed, duration, params));
           }),
           py::arg("scenario"), py::arg("strategy") = py::none(), py::arg("seed") = py::none(),
           py::arg("duration") = py::none(), py::arg("params") = std::map<std::string, double>{})
      .def("step", &Simulation::step)
      .def("run",
           [](Simulation& s) {
             {
               py::gil_scoped_release release;
               s.run();
             }
             return summary_dict(summarize(s.metrics().rows));
           })
      .def_property_readonly("time", &Simulation::time)
      .def_property_readonly("ticks", &Simulation::ticks)
      .def_property_readonly("positions",
                             [](const Simulation& s) {
                               std::vector<Point> out;
                               for (const auto& r : s.robots()) out.push_back(point(r.position));
                               return out;
                             })
      .def_property_readonly("goals",
                             [](const Simulation& s) {
                               std::vector<std::optional<int>> out;
                               if (s.planner_only()) return out;
                               for (std::size_t r = 0; r < s.robots().size(); ++r)
                                 out.push_back(s.agent(static_cast<RobotId>(r)).goal());
                               return out;
                             })
      .def_property_readonly("last_visits", &Simulation::last_visits)
      .def_property_readonly("interference_total", [](const Simulation& s) { return s.metrics().interference_total; })
      .def_property_readonly("deadlock", [](const Simulation& s) { return s.metrics().deadlock; })
      .def("csv", [](const Simulation& s) { return to_csv(s.metrics().rows); });
}
