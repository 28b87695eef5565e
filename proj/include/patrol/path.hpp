#pragma once

#include "patrol/geometry.hpp"

#include <vector>

namespace patrol {

/// Polyline over map points. `step_costs[k]` is the mixed cost paid to reach
/// waypoint k+1 from waypoint k when the path came out of the planner.
struct Path {
  std::vector<Vec3> waypoints;
  std::vector<double> step_costs;

  bool empty() const { return waypoints.empty(); }
  double length() const { return polyline_length(waypoints); }
  double cost() const {
    double c = 0.0;
    for (double s : step_costs) c += s;
    return c;
  }
};

}  // namespace patrol
