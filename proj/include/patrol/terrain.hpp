#pragma once

#include "patrol/geometry.hpp"
#include "patrol/kdtree.hpp"
#include "patrol/params.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace patrol {

enum class Label : std::uint8_t { terrain, wall, surmountable, ramp };

const char* to_string(Label label);
/// Accepts terrain, wall, ramp, surmountable / surmountable_obstacle.
std::optional<Label> label_from_string(const std::string& name);

/// Labeled point cloud with a spatial index and the per-point terms of the
/// traversability cost that do not depend on teammates.
class TerrainMap {
 public:
  TerrainMap() = default;
  /// `eps` is the neighbourhood radius used for density and roughness.
  TerrainMap(std::vector<Vec3> points, std::vector<Label> labels, double eps = 0.3);

  std::size_t size() const { return points_.size(); }
  const std::vector<Vec3>& points() const { return points_; }
  const Vec3& point(std::size_t i) const { return points_[i]; }
  Label label(std::size_t i) const { return labels_[i]; }
  const std::vector<Label>& labels() const { return labels_; }
  const KdTree& tree() const { return tree_; }
  const KdTree& walls() const { return walls_; }
  double eps() const { return eps_; }
  double density_reference() const { return n_ref_; }

  /// Distance to the nearest wall point (infinity without walls).
  double wall_clearance(std::size_t i) const { return wall_clearance_[i]; }
  double density_weight(std::size_t i) const { return w_dn_[i]; }
  double roughness_weight(std::size_t i) const { return w_rg_[i]; }

  /// Neighbours of p within eps, excluding a map point coincident with p.
  std::vector<std::uint32_t> neighborhood(const Vec3& p, double eps) const;

 private:
  std::vector<Vec3> points_;
  std::vector<Label> labels_;
  double eps_ = 0.3;
  KdTree tree_;
  KdTree walls_;
  double n_ref_ = 1.0;
  std::vector<double> wall_clearance_, w_dn_, w_rg_;
};

/// Normals from a k-NN plane fit: wall beyond 60 deg from vertical, ramp in
/// (20, 60], terrain otherwise; terrain/ramp points 5-15 cm above the local
/// ground fit become surmountable. Throws InputError with fewer than k points.
std::vector<Label> segment(std::span<const Vec3> points, int k_nn);

/// Reads `x y z [label]` lines; unlabeled points are labeled by `segment`.
TerrainMap read_map_file(const std::string& path, int k_nn, double eps);
void write_map_file(const std::string& path, const TerrainMap& map);

/// trav = wL (1 + wCl)(1 + wDn)(1 + wRg).
inline double traversability_cost(double wL, double wCl, double wDn, double wRg) {
  return wL * (1.0 + wCl) * (1.0 + wDn) * (1.0 + wRg);
}

/// max(0, 1 - n / n_ref).
inline double density_weight(double n_eps, double n_ref) { return std::max(0.0, 1.0 - n_eps / n_ref); }
double density_weight(const TerrainMap& map, const Vec3& p, double eps);

/// Mean absolute plane distance of the neighbours lying beyond one RMS
/// residual from the least-squares plane, divided by eps and capped at 1.
/// Fewer than three neighbours give 1.
double roughness_weight(std::span<const Vec3> neighbors, double eps);
double roughness_weight(const TerrainMap& map, const Vec3& p, double eps);

/// Clearance to penalty: max(0, (D_s - clearance) / D_s).
inline double clearance_penalty(double clearance, double D_s) { return std::max(0.0, (D_s - clearance) / D_s); }

double label_weight(Label label, const Params& params);

/// Region a teammate is about to sweep: balls of radius R_b along its path.
struct FutureTrail {
  int robot_id = -1;
  std::vector<Vec3> centers;
  double radius = 0.0;
};

/// Samples the polyline [pose, path...] every <= R_b/2 until it first leaves
/// the ball of radius R_c around pose; the exit point closes the trail.
FutureTrail future_trail(int robot_id, const Vec3& pose, std::span<const Vec3> path, double R_c, double R_b);

/// True when the trail's swept region intersects the ball of radius R_t around self.
bool trail_is_near(const FutureTrail& trail, const Vec3& self_pos, double R_t);

/// Distance from p to the surface of the closest trail ball, floored at 0.
double trail_clearance(const Vec3& p, const FutureTrail& trail);

/// Obstacles the planner should avoid besides the static walls.
struct ClearanceContext {
  const TerrainMap* map = nullptr;
  std::vector<FutureTrail> trails;  // only the ones near self are kept
  std::vector<Vec3> dynamic_obstacles;
  KdTree dynamic_tree;

  ClearanceContext(const TerrainMap& map, std::span<const FutureTrail> trails, const Vec3& self_pos, double R_t,
                   std::vector<Vec3> dynamic_obstacles = {});

  /// Clearance of base map point i.
  double clearance(std::size_t i) const;
  /// Clearance of an arbitrary point.
  double clearance(const Vec3& p) const;
};

/// Minimum over wall points, dynamic obstacles and the surfaces of trails near self.
double multi_robot_clearance(const Vec3& p, const TerrainMap& map, std::span<const FutureTrail> trails,
                             const Vec3& self_pos, double R_t, std::span<const Vec3> dynamic_obstacles = {});

/// Subset of the base map the robot may traverse, with per-point cost.
/// Stored as masks over the base point indices so neighbour queries reuse
/// the base kd-tree.
class TraversableMap {
 public:
  TraversableMap() = default;

  const TerrainMap& base() const { return *base_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  const std::vector<std::uint32_t>& indices() const { return indices_; }
  bool contains(std::size_t i) const { return i < mask_.size() && mask_[i]; }
  double trav(std::size_t i) const { return trav_[i]; }
  double clearance(std::size_t i) const { return clearance_[i]; }
  double trav_min() const { return trav_min_; }
  double trav_max() const { return trav_max_; }
  std::uint64_t generation() const { return generation_; }
  const std::optional<OrientedBox>& region() const { return region_; }

  /// Closest kept point within max_dist of p.
  std::optional<std::uint32_t> nearest(const Vec3& p, double max_dist) const;
  /// Kept points within r of p, sorted by index.
  std::vector<std::uint32_t> within(const Vec3& p, double r) const;

 private:
  friend TraversableMap build_traversable_region(const TerrainMap&, const ClearanceContext&, const Params&,
                                                 const OrientedBox*, std::uint64_t);
  const TerrainMap* base_ = nullptr;
  std::vector<std::uint32_t> indices_;
  std::vector<std::uint8_t> mask_;
  std::vector<double> trav_, clearance_;
  double trav_min_ = 0.0, trav_max_ = 0.0;
  std::uint64_t generation_ = 0;
  std::optional<OrientedBox> region_;
};

/// Non-wall points with clearance above the exclusion threshold, restricted
/// to `region` when given. May return an empty map.
TraversableMap build_traversable_region(const TerrainMap& map, const ClearanceContext& ctx, const Params& params,
                                        const OrientedBox* region = nullptr, std::uint64_t generation = 0);

/// Whole-map variant; throws Error when nothing is traversable (robot enclosed).
TraversableMap build_traversable_map(const TerrainMap& map, std::span<const FutureTrail> trails,
                                     const Vec3& self_pos, const Params& params,
                                     std::vector<Vec3> dynamic_obstacles = {}, std::uint64_t generation = 0);

}  // namespace patrol
