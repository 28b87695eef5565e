// patrolsim: run patrolling scenarios, build patrolling graphs, compare strategies.
#include "patrol/engine.hpp"
#include "patrol/errors.hpp"
#include "patrol/graph_builders.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

namespace fs = std::filesystem;
using namespace patrol;

namespace {

struct Common {
  std::string scenario;
  std::string strategy;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double duration = -1.0;
  double tick = -1.0;
  std::vector<std::string> params;
  std::string out = "out";
};

std::vector<std::pair<std::string, double>> parse_overrides(const std::vector<std::string>& raw) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& p : raw) out.push_back(parse_param_override(p));
  return out;
}

Scenario configured_scenario(const Common& c) {
  Scenario sc = load_scenario(c.scenario);
  for (const auto& [k, v] : parse_overrides(c.params)) sc.params.set(k, v);
  if (!c.strategy.empty()) sc.strategy = strategy_from_string(c.strategy);
  if (c.seed_set) sc.seed = c.seed;
  if (c.duration > 0.0) sc.duration_s = c.duration;
  if (c.tick > 0.0) sc.tick_s = c.tick;
  prepare_scenario(sc);
  return sc;
}

std::string summary_text(const Scenario& sc, const Common& c, const RunSummary& s, const std::string& csv_path) {
  std::ostringstream out;
  out << "# scenario: " << sc.name << "  strategy: " << to_string(sc.strategy) << "  seed: " << sc.seed
      << "  duration_s: " << sc.duration_s << "  tick_s: " << sc.tick_s << '\n';
  out << "# params:";
  if (c.params.empty()) out << " defaults";
  for (const auto& p : c.params) out << ' ' << p;
  out << '\n';
  out << "final_avg_idl=" << s.final_avg_idl << '\n'
      << "mean_avg_idl=" << s.mean_avg_idl << '\n'
      << "final_max_idl=" << s.final_max_idl << '\n'
      << "interference_total=" << s.interference_total << '\n'
      << "deadlock=" << (s.deadlock ? 1 : 0) << '\n'
      << "csv=" << csv_path << '\n';
  return out.str();
}

std::string stem(const Scenario& sc) {
  return (sc.name.empty() ? std::string("scenario") : sc.name) + "_" + to_string(sc.strategy) + "_s" +
         std::to_string(sc.seed);
}

int cmd_run(const Common& c, bool log_messages) {
  Scenario sc = configured_scenario(c);
  fs::create_directories(c.out);
  const std::string base = (fs::path(c.out) / stem(sc)).string();
  Simulation sim(sc);
  std::ofstream msg_log;
  if (log_messages) {
    msg_log.open(base + ".messages.tsv");
    sim.set_message_log(&msg_log);
  }
  const MetricsRecord& rec = sim.run();
  const std::string csv_path = base + ".csv";
  {
    std::ofstream csv(csv_path);
    if (!csv) throw InputError("cannot write '" + csv_path + "'");
    write_csv(csv, rec.rows);
  }
  const std::string text = summary_text(sc, c, summarize(rec.rows), csv_path);
  std::ofstream(base + ".summary.txt") << text;
  std::cout << text;
  return 0;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto dash = item.find('-');
    try {
      if (dash != std::string::npos && dash > 0) {
        const auto a = std::stoull(item.substr(0, dash)), b = std::stoull(item.substr(dash + 1));
        for (auto s = a; s <= b; ++s) seeds.push_back(s);
      } else {
        seeds.push_back(std::stoull(item));
      }
    } catch (const std::exception&) {
      throw InputError("bad seed list '" + text + "'");
    }
  }
  if (seeds.empty()) throw InputError("empty seed list");
  return seeds;
}

int cmd_compare(const Common& c, const std::string& seeds_text, const std::string& strategies_text) {
  Scenario sc = configured_scenario(c);
  const auto seeds = parse_seeds(seeds_text.empty() ? std::to_string(sc.seed) : seeds_text);
  std::vector<Strategy> strategies;
  std::stringstream ss(strategies_text);
  std::string item;
  while (std::getline(ss, item, ',')) strategies.push_back(strategy_from_string(item));
  fs::create_directories(c.out);
  const std::string name = sc.name.empty() ? "scenario" : sc.name;
  std::ofstream cells((fs::path(c.out) / (name + "_compare_cells.csv")).string());
  cells << "strategy,seed,mean_avg_idl,final_avg_idl,final_max_idl,interference_total,deadlock\n";
  std::ostringstream table;
  table << "strategy,seeds,mean_avg_idl,mean_final_max_idl,mean_interference,deadlocks\n";
  for (Strategy st : strategies) {
    double avg = 0.0, mx = 0.0, itf = 0.0;
    int deadlocks = 0;
    for (auto seed : seeds) {
      const auto rec = run_scenario(sc, st, seed);
      const auto s = summarize(rec.rows);
      cells << to_string(st) << ',' << seed << ',' << s.mean_avg_idl << ',' << s.final_avg_idl << ','
            << s.final_max_idl << ',' << s.interference_total << ',' << (s.deadlock ? 1 : 0) << '\n';
      avg += s.mean_avg_idl;
      mx += s.final_max_idl;
      itf += static_cast<double>(s.interference_total);
      deadlocks += s.deadlock ? 1 : 0;
    }
    const double n = static_cast<double>(seeds.size());
    table << to_string(st) << ',' << seeds.size() << ',' << avg / n << ',' << mx / n << ',' << itf / n << ','
          << deadlocks << '\n';
  }
  std::ofstream((fs::path(c.out) / (name + "_compare.csv")).string()) << table.str();
  std::cout << table.str();
  return 0;
}

std::vector<std::vector<Vec3>> read_point_blocks(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::vector<std::vector<Vec3>> blocks(1);
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double x, y, z;
    if (!(ls >> x)) {
      if (!blocks.back().empty()) blocks.emplace_back();
      continue;
    }
    if (!(ls >> y >> z)) throw InputError(path + ": expected x y z");
    blocks.back().emplace_back(x, y, z);
  }
  if (blocks.back().empty()) blocks.pop_back();
  if (blocks.empty()) throw InputError(path + ": no points");
  return blocks;
}

int cmd_build_graph(const std::string& map_path, const std::string& waypoints, const std::string& trajectories,
                    const std::vector<std::string>& raw_params, double sample_step, double voxel,
                    const std::string& out_path, std::uint64_t seed) {
  Params params;
  for (const auto& [k, v] : parse_overrides(raw_params)) params.set(k, v);
  params.validate();
  PatrollingGraph g;
  if (!trajectories.empty()) {
    TrajectoryGraphOptions o;
    o.visit_radius = params.R_v;
    g = build_from_trajectories(read_point_blocks(trajectories), sample_step, voxel, o);
  } else {
    if (map_path.empty()) throw InputError("--map is required with --waypoints");
    const TerrainMap map = read_map_file(map_path, params.k_nn, params.eps_nbhd);
    std::vector<Vec3> pts;
    for (const auto& b : read_point_blocks(waypoints)) pts.insert(pts.end(), b.begin(), b.end());
    WaypointGraphOptions o;
    o.d_max = params.d_max;
    o.alpha_max = params.alpha_max * std::numbers::pi / 180.0;
    o.clearance = params.R_b;
    o.lift = 2.0 * params.R_b;
    o.visit_radius = params.R_v;
    g = build_from_waypoints(pts, map, make_planner_probe(map, params, seed), o);
  }
  if (const auto dir = fs::path(out_path).parent_path(); !dir.empty()) fs::create_directories(dir);
  write_graph_file(out_path, g);
  std::cout << "graph: " << g.size() << " nodes, " << g.edges().size() << " edges, connected\n"
            << "written: " << out_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-robot patrolling simulator"};
  app.require_subcommand(1);

  Common c;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", c.scenario, "Scenario JSON file")->required();
    sub->add_option("--strategy", c.strategy, "cc, cwmc or nocc (default: scenario value)");
    sub->add_option("--duration", c.duration, "Simulated seconds");
    sub->add_option("--tick", c.tick, "Tick length in seconds");
    sub->add_option("--param", c.params, "Parameter override KEY=VAL (repeatable)");
    sub->add_option("--out", c.out, "Output directory");
  };

  bool log_messages = false;
  auto* run = app.add_subcommand("run", "Run one scenario and write the metrics CSV");
  add_common(run);
  run->add_option("--seed", c.seed, "Random seed")->each([&](const std::string&) { c.seed_set = true; });
  run->add_flag("--messages", log_messages, "Also write every broadcast to <out>/<run>.messages.tsv");

  std::string seeds, strategies = "cc,cwmc,nocc";
  auto* compare = app.add_subcommand("compare", "Run CC, CwMC and NoCC over a seed list");
  add_common(compare);
  compare->add_option("--seeds", seeds, "Seeds, e.g. 1,2,3 or 1-5");
  compare->add_option("--strategies", strategies, "Comma separated variants");

  std::string map_path, waypoints, trajectories, graph_out = "out/graph.txt";
  double sample_step = 1.0, voxel = 0.5;
  std::vector<std::string> bg_params;
  std::uint64_t bg_seed = 0;
  auto* build = app.add_subcommand("build-graph", "Build a patrolling graph from waypoints or trajectories");
  build->add_option("--map", map_path, "Map file (x y z [label])");
  auto* wp = build->add_option("--waypoints", waypoints, "Waypoint file, one x y z per line");
  auto* tr = build->add_option("--trajectories", trajectories, "Trajectory file, blank line between trajectories");
  wp->excludes(tr);
  build->add_option("--sample-step", sample_step, "Trajectory sampling step (m)");
  build->add_option("--voxel", voxel, "Voxel filter size (m)");
  build->add_option("--param", bg_params, "Parameter override KEY=VAL (repeatable)");
  build->add_option("--seed", bg_seed, "Seed for the path probe");
  build->add_option("--out", graph_out, "Output graph file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(c, log_messages);
    if (*compare) return cmd_compare(c, seeds, strategies);
    if (*build) {
      if (waypoints.empty() && trajectories.empty()) throw InputError("give --waypoints or --trajectories");
      return cmd_build_graph(map_path, waypoints, trajectories, bg_params, sample_step, voxel, graph_out, bg_seed);
    }
  } catch (const GraphDisconnectedError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
