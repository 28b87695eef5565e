#pragma once

#include "patrol/params.hpp"
#include "patrol/patrol_graph.hpp"
#include "patrol/terrain.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace patrol {

/// Length of a traversable path from a to b, or nothing when none exists.
using PathProbe = std::function<std::optional<double>(const Vec3& a, const Vec3& b)>;

struct WaypointGraphOptions {
  double d_max = 5.0;                   // m
  double alpha_max = 30.0 * 3.14159265358979323846 / 180.0;  // rad
  double clearance = 0.47;              // R_b: map points closer than this to the segment block it
  double lift = 0.94;                   // the segment is tested this far above the ground points
  double sample_step = 0.25;            // spacing of collision samples along the segment
  double visit_radius = 0.5;
  double priority = 1.0;
};

/// Any map point within `clearance` of the segment a-b raised by `lift`,
/// probed every `sample_step`.
bool segment_hits_map(const Vec3& a, const Vec3& b, const TerrainMap& map, double clearance, double lift,
                      double sample_step);

/// Connects waypoint pairs that are close, in line of sight, not too steep
/// and joined by a traversable path. Edge cost is the probed path length
/// between the two visit balls. Unconnected waypoints are dropped; node ids
/// are the waypoint indices. Throws GraphDisconnectedError if the result is
/// empty or split.
PatrollingGraph build_from_waypoints(std::span<const Vec3> points, const TerrainMap& map, const PathProbe& probe,
                                     const WaypointGraphOptions& options);

/// Probe backed by the randomized planner on the map without teammates.
PathProbe make_planner_probe(const TerrainMap& map, const Params& params, std::uint64_t seed);

struct TrajectoryGraphOptions {
  double initial_radius = -1.0;  // < 0: twice the voxel size
  double growth = 1.5;
  int max_iterations = 20;
  double visit_radius = 0.5;
  double priority = 1.0;
};

/// Subsamples the trajectories by arc length, voxel-filters the samples into
/// nodes, links nodes within the initial radius, then links components with a
/// radius grown each iteration until one component remains.
PatrollingGraph build_from_trajectories(const std::vector<std::vector<Vec3>>& trajectories, double sample_step,
                                        double voxel_size, const TrajectoryGraphOptions& options = {});

}  // namespace patrol
