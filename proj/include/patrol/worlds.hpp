#pragma once

#include "patrol/params.hpp"
#include "patrol/patrol_graph.hpp"
#include "patrol/terrain.hpp"

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace patrol {

/// Synthetic environment: map, patrolling graph and suggested robot starts.
struct World {
  std::string name;
  std::shared_ptr<const TerrainMap> map;
  std::shared_ptr<const PatrollingGraph> graph;
  std::vector<Vec3> starts;
  std::vector<std::array<Vec3, 2>> cycles;  // crossing waypoint pairs, one per start
};

/// Flat ground grid of nx * ny points starting at the origin.
TerrainMap flat_grid_map(int nx, int ny, double spacing, double eps = 0.3);

/// Ground points on the cells where `free(x, y)` holds inside the box, and
/// wall columns up to `wall_height` on blocked cells bordering free ones.
TerrainMap mask_map(const std::function<bool(double, double)>& free, double xmin, double xmax, double ymin,
                    double ymax, double spacing, double wall_height = 1.0, double eps = 0.3);

/// A single row of points along x with two nodes `node_distance` apart.
World line_world(double node_distance, const Params& params, double spacing = 0.25);

/// Two corridors of the given width crossing at the origin, arms of length
/// `arm`; nodes every `node_step` along the arms.
World crossroad_world(const Params& params, double arm = 8.0, double width = 2.4, double node_step = 3.5);

/// Three corridors meeting at the origin 120 degrees apart. Robot i starts
/// at the end of arm i and shuttles to the end of arm i+1.
World three_ways_world(const Params& params, double arm = 7.0, double width = 2.6, double node_step = 3.5);

/// Straight corridor along x with nodes every `node_step`.
World corridor_world(const Params& params, double length = 16.0, double width = 3.5, double node_step = 4.0);

}  // namespace patrol
