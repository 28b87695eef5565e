// make_worlds: writes the synthetic example scenarios (map, graph, scenario JSON).
#include "patrol/errors.hpp"
#include "patrol/worlds.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace patrol;

namespace {

nlohmann::json point(const Vec3& p) { return nlohmann::json::array({p.x(), p.y(), p.z()}); }

void write_world(const World& w, const fs::path& dir, const std::string& strategy, double duration,
                 bool shuttle) {
  write_map_file((dir / (w.name + ".map")).string(), *w.map);
  write_graph_file((dir / (w.name + ".graph")).string(), *w.graph);
  nlohmann::json j;
  j["name"] = w.name;
  j["map"] = w.name + ".map";
  j["graph"] = w.name + ".graph";
  j["robots"] = nlohmann::json::array();
  for (const auto& s : w.starts) j["robots"].push_back(point(s));
  j["strategy"] = strategy;
  j["duration_s"] = duration;
  j["seed"] = 1;
  std::ofstream((dir / (w.name + ".json")).string()) << j.dump(2) << '\n';
  if (shuttle && !w.cycles.empty()) {
    j["name"] = w.name + "_shuttle";
    j["waypoint_cycles"] = nlohmann::json::array();
    for (const auto& c : w.cycles) j["waypoint_cycles"].push_back({point(c[0]), point(c[1])});
    std::ofstream((dir / (w.name + "_shuttle.json")).string()) << j.dump(2) << '\n';
  }
  std::cout << w.name << ": " << w.map->size() << " points, " << w.graph->size() << " nodes, "
            << w.graph->edges().size() << " edges\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Write the synthetic example worlds"};
  std::string out = "scenarios";
  app.add_option("--out", out, "Output directory");
  CLI11_PARSE(app, argc, argv);
  try {
    fs::create_directories(out);
    const Params params;
    write_world(crossroad_world(params), out, "cc", 600.0, false);
    write_world(three_ways_world(params), out, "cc", 600.0, true);
    write_world(corridor_world(params), out, "cc", 600.0, false);
    write_world(line_world(5.0, params), out, "cc", 200.0, false);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
