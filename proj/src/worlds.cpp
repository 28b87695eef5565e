#include "patrol/worlds.hpp"

#include "patrol/graph_builders.hpp"

#include <cmath>
#include <numbers>

namespace patrol {

TerrainMap flat_grid_map(int nx, int ny, double spacing, double eps) {
  std::vector<Vec3> pts;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) pts.emplace_back(i * spacing, j * spacing, 0.0);
  std::vector<Label> labels(pts.size(), Label::terrain);
  return TerrainMap(std::move(pts), std::move(labels), eps);
}

TerrainMap mask_map(const std::function<bool(double, double)>& free, double xmin, double xmax, double ymin,
                    double ymax, double spacing, double wall_height, double eps) {
  const int nx = static_cast<int>(std::floor((xmax - xmin) / spacing + 1e-9)) + 1;
  const int ny = static_cast<int>(std::floor((ymax - ymin) / spacing + 1e-9)) + 1;
  auto x_of = [&](int i) { return xmin + i * spacing; };
  auto y_of = [&](int j) { return ymin + j * spacing; };
  auto is_free = [&](int i, int j) { return i >= 0 && j >= 0 && i < nx && j < ny && free(x_of(i), y_of(j)); };
  std::vector<Vec3> pts;
  std::vector<Label> labels;
  const int levels = static_cast<int>(std::floor(wall_height / spacing + 1e-9));
  for (int i = -1; i <= nx; ++i)
    for (int j = -1; j <= ny; ++j) {
      if (is_free(i, j)) {
        pts.emplace_back(x_of(i), y_of(j), 0.0);
        labels.push_back(Label::terrain);
        continue;
      }
      bool border = false;
      for (int di = -1; di <= 1 && !border; ++di)
        for (int dj = -1; dj <= 1; ++dj)
          if (is_free(i + di, j + dj)) border = true;
      if (!border) continue;
      for (int k = 0; k <= levels; ++k) {
        pts.emplace_back(x_of(i), y_of(j), k * spacing);
        labels.push_back(Label::wall);
      }
    }
  return TerrainMap(std::move(pts), std::move(labels), eps);
}

namespace {

std::shared_ptr<const PatrollingGraph> waypoint_graph(const std::vector<Vec3>& nodes, const TerrainMap& map,
                                                      const Params& params) {
  WaypointGraphOptions o;
  o.d_max = params.d_max;
  o.alpha_max = params.alpha_max * std::numbers::pi / 180.0;
  o.clearance = params.R_b;
  o.lift = 2.0 * params.R_b;
  o.visit_radius = params.R_v;
  return std::make_shared<PatrollingGraph>(
      build_from_waypoints(nodes, map, make_planner_probe(map, params, 17), o));
}

}  // namespace

World line_world(double node_distance, const Params& params, double spacing) {
  World w;
  w.name = "line";
  const double margin = 1.0;
  const int n = static_cast<int>(std::llround((node_distance + 2 * margin) / spacing)) + 1;
  std::vector<Vec3> pts;
  for (int i = 0; i < n; ++i) pts.emplace_back(i * spacing, 0.0, 0.0);
  std::vector<Label> labels(pts.size(), Label::terrain);
  w.map = std::make_shared<TerrainMap>(std::move(pts), std::move(labels), params.eps_nbhd);
  Params p = params;
  p.d_max = std::max(p.d_max, node_distance + 1.0);
  w.graph = waypoint_graph({Vec3(margin, 0, 0), Vec3(margin + node_distance, 0, 0)}, *w.map, p);
  w.starts = {Vec3(margin, 0, 0)};
  return w;
}

World crossroad_world(const Params& params, double arm, double width, double node_step) {
  World w;
  w.name = "crossroad";
  const double h = 0.5 * width;
  auto free = [=](double x, double y) {
    return (std::abs(y) <= h + 1e-9 && std::abs(x) <= arm + 1e-9) || (std::abs(x) <= h + 1e-9 && std::abs(y) <= arm + 1e-9);
  };
  w.map = std::make_shared<TerrainMap>(mask_map(free, -arm, arm, -arm, arm, 0.25, 1.0, params.eps_nbhd));
  std::vector<Vec3> nodes{Vec3::Zero()};
  for (double d = node_step; d <= arm - 1.0 + 1e-9; d += node_step)
    for (const Vec3& dir : {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(-1, 0, 0), Vec3(0, -1, 0)}) nodes.push_back(dir * d);
  w.graph = waypoint_graph(nodes, *w.map, params);
  const double far = std::floor((arm - 1.0) / node_step) * node_step;
  w.starts = {Vec3(far, 0, 0), Vec3(0, far, 0), Vec3(-far, 0, 0), Vec3(0, -far, 0)};
  return w;
}

World three_ways_world(const Params& params, double arm, double width, double node_step) {
  World w;
  w.name = "three_ways";
  const double h = 0.5 * width;
  std::vector<Vec3> dirs;
  for (int k = 0; k < 3; ++k) {
    const double a = std::numbers::pi / 2 + k * 2.0 * std::numbers::pi / 3.0;
    dirs.emplace_back(std::cos(a), std::sin(a), 0.0);
  }
  auto free = [=](double x, double y) {
    const Vec3 p(x, y, 0);
    if (p.norm() <= h + 1e-9) return true;
    for (const auto& d : dirs) {
      const double along = p.dot(d);
      const double across = (p - d * along).norm();
      if (along >= 0.0 && along <= arm + 1e-9 && across <= h + 1e-9) return true;
    }
    return false;
  };
  const double ext = arm + 1.0;
  w.map = std::make_shared<TerrainMap>(mask_map(free, -ext, ext, -ext, ext, 0.25, 1.0, params.eps_nbhd));
  auto snap = [&](const Vec3& p) { return w.map->point(static_cast<std::size_t>(w.map->tree().nearest(p).first)); };
  std::vector<Vec3> nodes{Vec3::Zero()};
  for (double d = node_step; d <= arm - 0.5 + 1e-9; d += node_step)
    for (const auto& dir : dirs) nodes.push_back(snap(dir * d));
  w.graph = waypoint_graph(nodes, *w.map, params);
  const double far = arm - 1.0;
  for (int k = 0; k < 3; ++k) {
    w.starts.push_back(snap(dirs[static_cast<std::size_t>(k)] * far));
    w.cycles.push_back({snap(dirs[static_cast<std::size_t>(k)] * far), snap(dirs[static_cast<std::size_t>((k + 1) % 3)] * far)});
  }
  return w;
}

World corridor_world(const Params& params, double length, double width, double node_step) {
  World w;
  w.name = "corridor";
  const double h = 0.5 * width;
  auto free = [=](double x, double y) { return x >= -1e-9 && x <= length + 1e-9 && std::abs(y) <= h + 1e-9; };
  w.map = std::make_shared<TerrainMap>(mask_map(free, 0.0, length, -h, h, 0.25, 1.0, params.eps_nbhd));
  std::vector<Vec3> nodes;
  for (double x = 1.0; x <= length - 1.0 + 1e-9; x += node_step) nodes.emplace_back(x, 0.0, 0.0);
  w.graph = waypoint_graph(nodes, *w.map, params);
  w.starts = {nodes.front(), nodes.back()};
  return w;
}

}  // namespace patrol
