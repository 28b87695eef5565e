#include "patrol/engine.hpp"

#include "patrol/errors.hpp"
#include "patrol/idleness.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace patrol {

namespace {

using nlohmann::json;

Vec3 parse_point(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number())
    throw InputError(what + ": expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::string resolve(const std::string& base_dir, const std::string& p) {
  if (p.empty() || base_dir.empty()) return p;
  const std::filesystem::path path(p);
  return path.is_absolute() ? p : (std::filesystem::path(base_dir) / path).string();
}

std::string format_number(double v) {
  char buf[64];
  if (v == 0.0) v = 0.0;  // no "-0"
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

Scenario parse_scenario(const std::string& json_text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError("scenario must be a JSON object");
  static const std::vector<std::string> known = {"name",    "map",          "graph",     "robots",
                                                 "strategy", "duration_s",  "tick_s",    "seed",
                                                 "link_prob", "link_delay_s", "params",  "waypoint_cycles",
                                                 "dynamic_obstacles"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) throw InputError("unknown scenario key '" + key + "'");

  Scenario sc;
  try {
    sc.name = j.value("name", std::string{});
    if (!j.contains("map") || !j.contains("graph") || !j.contains("robots"))
      throw InputError("scenario needs 'map', 'graph' and 'robots'");
    sc.map_path = resolve(base_dir, j.at("map").get<std::string>());
    sc.graph_path = resolve(base_dir, j.at("graph").get<std::string>());
    for (const auto& r : j.at("robots")) sc.robots.push_back(parse_point(r, "robots"));
    if (j.contains("strategy")) sc.strategy = strategy_from_string(j.at("strategy").get<std::string>());
    sc.duration_s = j.value("duration_s", sc.duration_s);
    sc.tick_s = j.value("tick_s", sc.tick_s);
    sc.seed = j.value("seed", sc.seed);
    sc.link_prob = j.value("link_prob", sc.link_prob);
    sc.link_delay_s = j.value("link_delay_s", sc.link_delay_s);
    if (j.contains("params")) {
      if (!j.at("params").is_object()) throw InputError("'params' must be an object");
      for (const auto& [key, value] : j.at("params").items()) {
        if (!value.is_number()) throw InputError("parameter '" + key + "' must be a number");
        sc.params.set(key, value.get<double>());
      }
    }
    if (j.contains("waypoint_cycles"))
      for (const auto& pair : j.at("waypoint_cycles")) {
        if (!pair.is_array() || pair.size() != 2) throw InputError("waypoint_cycles: expected [[x,y,z],[x,y,z]]");
        sc.waypoint_cycles.push_back({parse_point(pair[0], "waypoint_cycles"), parse_point(pair[1], "waypoint_cycles")});
      }
    if (j.contains("dynamic_obstacles"))
      for (const auto& p : j.at("dynamic_obstacles")) sc.dynamic_obstacles.push_back(parse_point(p, "dynamic_obstacles"));
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed scenario: ") + e.what());
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  Scenario sc = parse_scenario(ss.str(), std::filesystem::path(path).parent_path().string());
  if (sc.name.empty()) sc.name = std::filesystem::path(path).stem().string();
  return sc;
}

void prepare_scenario(Scenario& sc, const std::vector<std::pair<NodeId, NodeId>>& missing_costs) {
  sc.params.validate();
  if (!(sc.tick_s > 0.0)) throw InputError("tick_s must be > 0");
  if (!(sc.duration_s > 0.0)) throw InputError("duration_s must be > 0");
  if (sc.link_prob < 0.0 || sc.link_prob > 1.0) throw InputError("link_prob must lie in [0, 1]");
  if (sc.link_delay_s < 0.0) throw InputError("link_delay_s must be >= 0");
  if (sc.robots.empty()) throw InputError("scenario needs at least one robot");

  if (!sc.map) {
    if (!std::filesystem::exists(sc.map_path)) throw InputError("map file '" + sc.map_path + "' not found");
    sc.map = std::make_shared<TerrainMap>(read_map_file(sc.map_path, sc.params.k_nn, sc.params.eps_nbhd));
  }
  std::vector<std::pair<NodeId, NodeId>> missing = missing_costs;
  if (!sc.graph) {
    if (!std::filesystem::exists(sc.graph_path)) throw InputError("graph file '" + sc.graph_path + "' not found");
    auto gf = read_graph_file(sc.graph_path);
    missing = gf.missing_costs;
    sc.graph = std::make_shared<PatrollingGraph>(std::move(gf.graph));
  }
  if (!missing.empty()) {
    // edge costs left blank in the file are measured with the planner on the static map
    auto graph = std::make_shared<PatrollingGraph>(*sc.graph);
    const TraversableMap free_map = build_traversable_map(*sc.map, {}, Vec3::Zero(), sc.params);
    for (const auto& [i, j] : missing) {
      const Node& a = graph->node(i);
      const Node& b = graph->node(j);
      Rng rng = Rng::derive(sc.seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j) + 0x9000);
      const auto path = randomized_astar(a.position, b.position, free_map, sc.params, rng, b.visit_radius);
      const double len = path ? path->length() : distance(a.position, b.position);
      graph->add_edge(i, j, std::max(1e-3, len));
    }
    sc.graph = graph;
  }
  sc.graph->require_connected();

  for (std::size_t r = 0; r < sc.robots.size(); ++r) {
    bool on_map = false;
    for (auto j : sc.map->tree().radius(sc.robots[r], 2.0 * sc.params.R_b))
      if (sc.map->label(j) != Label::wall) on_map = true;
    if (!on_map) throw InputError("robot " + std::to_string(r) + " does not start on traversable terrain");
    for (std::size_t s = 0; s < r; ++s)
      if (distance(sc.robots[r], sc.robots[s]) <= sc.params.D_s)
        throw InputError("robots " + std::to_string(s) + " and " + std::to_string(r) +
                         " start closer than the safety distance");
  }
  if (!sc.waypoint_cycles.empty() && sc.waypoint_cycles.size() != sc.robots.size())
    throw InputError("waypoint_cycles needs one pair per robot");
}

void write_csv(std::ostream& out, const std::vector<CsvRow>& rows) {
  out << "t,node,event,robot,value\n";
  for (const auto& r : rows) {
    out << format_number(r.t) << ',';
    if (r.node) out << *r.node;
    out << ',' << r.event << ',';
    if (r.robot) out << *r.robot;
    out << ',' << format_number(r.value) << '\n';
  }
}

std::string to_csv(const std::vector<CsvRow>& rows) {
  std::ostringstream out;
  write_csv(out, rows);
  return out.str();
}

std::vector<CsvRow> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "t,node,event,robot,value") throw InputError("metrics CSV: bad header");
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() == 4 && !line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 5) throw InputError("metrics CSV: expected 5 fields in '" + line + "'");
    try {
      CsvRow r;
      r.t = std::stod(f[0]);
      if (!f[1].empty()) r.node = std::stoi(f[1]);
      r.event = f[2];
      if (!f[3].empty()) r.robot = std::stoi(f[3]);
      r.value = std::stod(f[4]);
      rows.push_back(std::move(r));
    } catch (const std::exception&) {
      throw InputError("metrics CSV: bad number in '" + line + "'");
    }
  }
  return rows;
}

RunSummary summarize(const std::vector<CsvRow>& rows) {
  RunSummary s;
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : rows) {
    if (r.event == "avg_idl") {
      s.final_avg_idl = r.value;
      sum += r.value;
      ++n;
    } else if (r.event == "max_idl") {
      s.final_max_idl = r.value;
    } else if (r.event == "interference") {
      s.interference_total += static_cast<std::size_t>(r.value);
    } else if (r.event == "deadlock") {
      s.deadlock = true;
    }
  }
  if (n) s.mean_avg_idl = sum / static_cast<double>(n);
  return s;
}

bool detect_deadlock(const std::vector<PoseTrace>& traces, const std::vector<bool>& pending, double t,
                     double window, double eps_d) {
  if (!(window > 0.0)) throw std::invalid_argument("deadlock window must be > 0");
  bool any = false;
  for (std::size_t r = 0; r < traces.size(); ++r) {
    if (!pending[r]) continue;
    const auto& h = traces[r];
    if (h.empty() || h.front().first > t - window + 1e-9) return false;  // not observed for a full window yet
    // position at the start of the window
    auto it = h.begin();
    while (std::next(it) != h.end() && std::next(it)->first <= t - window + 1e-9) ++it;
    for (auto k = it; k != h.end(); ++k)
      if (distance(k->second, it->second) >= eps_d) return false;
    any = true;
  }
  return any;
}

Simulation::Simulation(Scenario scenario) : sc_(std::move(scenario)) {
  if (!sc_.map || !sc_.graph) prepare_scenario(sc_);
  sc_.params.validate();
  map_ = sc_.map.get();
  graph_ = sc_.graph.get();
  toggles_ = strategy_wiring(sc_.strategy);
  const std::size_t m = sc_.robots.size();
  link_ = LinkModel(m, sc_.link_prob, sc_.link_delay_s);
  net_rng_ = Rng::derive(sc_.seed, 0xFFFFFFFFull, 3);
  for (std::size_t r = 0; r < m; ++r) {
    const auto id = static_cast<RobotId>(r);
    robots_.push_back({id, sc_.robots[r], 0.0, 0.0});
    agents_.emplace_back(id, m, *graph_, sc_.params, sc_.strategy, Rng::derive(sc_.seed, r, 1), sc_.robots[r], 0.0);
    planners_.emplace_back(sc_.params, Rng::derive(sc_.seed, r, 2));
    noise_rng_.push_back(Rng::derive(sc_.seed, r, 4));
    inside_.push_back(graph_->nodes_containing(sc_.robots[r]));
    traces_.push_back({{0.0, sc_.robots[r]}});
  }
  pending_status_.resize(m);
  cycle_target_.assign(m, -1);
  last_visit_.assign(graph_->size(), 0.0);
  auto every = [&](double hz) {
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(1.0 / (hz * sc_.tick_s))));
  };
  interference_every_ = every(sc_.params.interference_hz);
  record_every_ = every(sc_.params.record_hz);
}

void Simulation::send(const Message& msg, double t) {
  ++metrics_.messages_sent;
  metrics_.messages_delivered += broadcast(link_, queue_, msg, t, net_rng_);
  if (message_log_) *message_log_ << format_message(msg, t) << '\n';
}

MapProvider Simulation::map_provider(RobotId r, std::uint64_t& generation, std::optional<ClearanceContext>& ctx) {
  return [this, r, &generation, &ctx](const OrientedBox* region) {
    if (!ctx) {
      std::vector<FutureTrail> trails;
      if (toggles_.teammate_trails) {
        for (const auto& [id, rec] : agents_[static_cast<std::size_t>(r)].knowledge().teammate_trails())
          trails.push_back(future_trail(id, rec->waypoints.front(), rec->waypoints, sc_.params.R_c, sc_.params.R_b));
      }
      ctx.emplace(*map_, trails, robots_[static_cast<std::size_t>(r)].position, sc_.params.R_t,
                  sc_.dynamic_obstacles);
    }
    return build_traversable_region(*map_, *ctx, sc_.params, region, ++generation);
  };
}

void Simulation::step() {
  ++tick_;
  const double t = time();
  const std::size_t m = robots_.size();

  std::vector<std::vector<Message>> inbox(m);
  for (auto& d : queue_.drain(t)) inbox[static_cast<std::size_t>(d.receiver)].push_back(std::move(d.message));

  std::vector<Vec3> perceived(m);
  for (std::size_t r = 0; r < m; ++r) {
    perceived[r] = robots_[r].position;
    if (sc_.params.position_noise > 0.0) {
      for (int k = 0; k < 3; ++k) {
        // Box-Muller keeps the draws platform independent
        const double u1 = 1.0 - noise_rng_[r].uniform(), u2 = noise_rng_[r].uniform();
        perceived[r][k] += sc_.params.position_noise * std::sqrt(-2.0 * std::log(u1)) * std::cos(2 * M_PI * u2);
      }
    }
  }

  // topological level
  for (std::size_t r = 0; r < m; ++r) {
    const auto id = static_cast<RobotId>(r);
    auto& planner = planners_[r];
    const auto status = std::exchange(pending_status_[r], std::nullopt);
    if (planner_only()) {
      auto& know = agents_[r].knowledge();
      for (const auto& msg : inbox[r])
        if (msg.kind == MessageKind::path) know.apply(msg, t, *graph_);
      know.expire(t, sc_.params.T_exp);
      // shuttle between the two waypoints; a failed session turns the robot around
      const bool first = cycle_target_[r] < 0;
      const bool turn = status && (status->kind == StatusKind::reached || status->kind == StatusKind::failure);
      if (first || turn) cycle_target_[r] = first ? 1 : 1 - cycle_target_[r];
      if (first || (status && status->kind != StatusKind::success))
        planner.command(PlannerCommand::go(sc_.waypoint_cycles[r][static_cast<std::size_t>(cycle_target_[r])],
                                           sc_.params.R_v),
                        t);
      continue;
    }
    auto& agent = agents_[r];
    for (const auto& msg : agent.update(t, perceived[r], inbox[r], status)) send(msg, t);
    auto act = agent.step(t, perceived[r]);
    if (act.abort_planner) planner.command(PlannerCommand::abort(), t);
    for (const auto& msg : act.broadcasts) send(msg, t);
    if (act.go) planner.command(*act.go, t);
    (void)id;
  }

  // metric level
  for (std::size_t r = 0; r < m; ++r) {
    std::optional<ClearanceContext> ctx;
    auto status = planners_[r].tick(perceived[r], t, map_provider(static_cast<RobotId>(r), map_generation_, ctx));
    if (status) pending_status_[r] = std::move(status);
    const auto& tracking = planners_[r].tracking();
    if (tracking.size() >= 2)
      send(Message::path_update(static_cast<RobotId>(r), t, tracking, polyline_length(tracking)), t);
    else
      send(Message::path_update(static_cast<RobotId>(r), t, {perceived[r]}, 0.0), t);
  }

  move_robots(t);
  for (std::size_t r = 0; r < m; ++r)
    if (auto st = planners_[r].check_reached(robots_[r].position)) pending_status_[r] = std::move(st);

  record_visits(t);
  sample_metrics(t);
}

namespace {

// Point at arc length `dist` along the polyline, or its end.
Vec3 look_ahead(const std::vector<Vec3>& path, double dist) {
  if (path.empty()) return Vec3::Zero();
  for (std::size_t k = 1; k < path.size(); ++k) {
    const double len = distance(path[k - 1], path[k]);
    if (len >= dist && len > 0.0) return path[k - 1] + (path[k] - path[k - 1]) * (dist / len);
    dist -= len;
  }
  return path.back();
}

}  // namespace

void Simulation::move_robots(double t) {
  const std::size_t m = robots_.size();
  const double reach = sc_.params.v_max * sc_.tick_s;
  std::vector<Vec3> next(m);
  for (std::size_t r = 0; r < m; ++r) {
    const auto& path = planners_[r].tracking();
    Vec3 cur = robots_[r].position;
    double left = reach;
    for (std::size_t k = 1; k < path.size() && left > 0.0; ++k) {
      const Vec3 seg = path[k] - cur;
      const double len = seg.norm();
      if (len <= left + 1e-9) {
        cur = path[k];
        left = std::max(0.0, left - len);
      } else {
        cur += seg * (left / len);
        left = 0.0;
      }
    }
    next[r] = cur;
  }
  // proximity checker: no forward motion while a teammate inside the stop distance lies ahead
  // (heading taken toward the tracked path one stop distance ahead), and never closing in on one
  for (std::size_t r = 0; r < m; ++r) {
    const Vec3 heading = look_ahead(planners_[r].tracking(), sc_.params.stop_distance) - robots_[r].position;
    for (std::size_t s = 0; s < m && next[r] != robots_[r].position; ++s) {
      if (s == r) continue;
      const Vec3 to_mate = robots_[s].position - robots_[r].position;
      const double before = to_mate.norm();
      const double after = distance(next[r], robots_[s].position);
      const bool ahead = before < sc_.params.stop_distance && heading.dot(to_mate) > 0.0;
      if (ahead || (after < sc_.params.stop_distance && after < before)) next[r] = robots_[r].position;
    }
  }
  for (std::size_t r = 0; r < m; ++r) {
    const double moved = distance(next[r], robots_[r].position);
    if (moved > reach + 1e-9)
      throw InvariantViolation("robot " + std::to_string(r) + " moved " + std::to_string(moved) + " m in one tick");
    robots_[r].position = next[r];
    robots_[r].odometer += moved;
    robots_[r].speed = moved / sc_.tick_s;
    traces_[r].emplace_back(t, robots_[r].position);
    while (traces_[r].size() > 2 && traces_[r][1].first <= t - sc_.params.deadlock_window + 1e-9)
      traces_[r].pop_front();
  }
}

void Simulation::record_visits(double t) {
  for (std::size_t r = 0; r < robots_.size(); ++r) {
    auto now_inside = graph_->nodes_containing(robots_[r].position);
    for (NodeId n : now_inside) {
      const std::size_t k = graph_->index_of(n);
      if (std::find(inside_[r].begin(), inside_[r].end(), n) == inside_[r].end()) {
        const double idl = graph_->node(n).priority * (t - last_visit_[k]);
        metrics_.visits.push_back({t, n, static_cast<RobotId>(r), idl});
        metrics_.rows.push_back({t, n, "visit", static_cast<int>(r), idl});
      }
      last_visit_[k] = t;
    }
    inside_[r] = std::move(now_inside);
  }
}

void Simulation::sample_metrics(double t) {
  const std::size_t m = robots_.size();
  if (tick_ % interference_every_ == 0)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j)
        if (distance(robots_[i].position, robots_[j].position) < sc_.params.D_s) {
          ++interference_since_record_;
          ++metrics_.interference_total;
        }

  std::vector<double> idl(graph_->size());
  for (std::size_t k = 0; k < idl.size(); ++k) idl[k] = graph_->nodes()[k].priority * (t - last_visit_[k]);
  idleness_window_.emplace_back(t, std::move(idl));
  while (idleness_window_.front().first < t - sc_.params.Delta - 1e-9) idleness_window_.pop_front();

  if (tick_ % record_every_ == 0) {
    std::vector<std::vector<double>> per_node(graph_->size());
    for (const auto& [ts, v] : idleness_window_)
      for (std::size_t k = 0; k < v.size(); ++k) per_node[k].push_back(v[k]);
    const WindowStats ws = pooled_window_stats(per_node);
    metrics_.rows.push_back({t, std::nullopt, "avg_idl", std::nullopt, ws.avg});
    metrics_.rows.push_back({t, std::nullopt, "std_idl", std::nullopt, ws.std});
    metrics_.rows.push_back({t, std::nullopt, "max_idl", std::nullopt, ws.max});
    metrics_.rows.push_back(
        {t, std::nullopt, "interference", std::nullopt, static_cast<double>(interference_since_record_)});
    interference_since_record_ = 0;
  }

  std::vector<bool> pending(m);
  for (std::size_t r = 0; r < m; ++r) pending[r] = planner_only() || agents_[r].goal().has_value();
  const bool dl = detect_deadlock(traces_, pending, t, sc_.params.deadlock_window, sc_.params.eps_d);
  if (dl && !deadlocked_) {
    metrics_.rows.push_back({t, std::nullopt, "deadlock", std::nullopt, 1.0});
    metrics_.deadlock = true;
    if (!metrics_.deadlock_time) metrics_.deadlock_time = t;
  }
  deadlocked_ = dl;
}

const MetricsRecord& Simulation::run() {
  const auto total = static_cast<std::uint64_t>(std::llround(sc_.duration_s / sc_.tick_s));
  while (tick_ < total) step();
  return metrics_;
}

MetricsRecord run_scenario(Scenario sc, Strategy strategy, std::uint64_t seed) {
  sc.strategy = strategy;
  sc.seed = seed;
  Simulation sim(std::move(sc));
  return sim.run();
}

}  // namespace patrol
