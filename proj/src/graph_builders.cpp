#include "patrol/graph_builders.hpp"

#include "patrol/errors.hpp"
#include "patrol/planner.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <tuple>

namespace patrol {

bool segment_hits_map(const Vec3& a, const Vec3& b, const TerrainMap& map, double clearance, double lift,
                      double sample_step) {
  const Vec3 up(0.0, 0.0, lift);
  const Vec3 a1 = a + up, b1 = b + up;
  const double len = (b1 - a1).norm();
  const int n = std::max(1, static_cast<int>(std::ceil(len / sample_step)));
  for (int k = 0; k <= n; ++k) {
    const Vec3 q = a1 + (b1 - a1) * (static_cast<double>(k) / n);
    if (map.tree().count_radius(q, clearance) > 0) return true;
  }
  return false;
}

PatrollingGraph build_from_waypoints(std::span<const Vec3> points, const TerrainMap& map, const PathProbe& probe,
                                     const WaypointGraphOptions& o) {
  if (points.empty()) throw std::invalid_argument("no waypoints given");
  if (!(o.d_max > 0.0)) throw std::invalid_argument("d_max must be > 0");
  std::vector<std::tuple<int, int, double>> edges;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const Vec3 &a = points[i], &b = points[j];
      if (distance(a, b) > o.d_max) continue;
      if (elevation_angle(a, b) > o.alpha_max) continue;
      if (segment_hits_map(a, b, map, o.clearance, o.lift, o.sample_step)) continue;
      const auto len = probe(a, b);
      if (!len) continue;
      edges.emplace_back(static_cast<int>(i), static_cast<int>(j), std::max(1e-3, *len - o.visit_radius));
    }
  std::vector<bool> used(points.size(), false);
  for (const auto& [i, j, c] : edges) used[static_cast<std::size_t>(i)] = used[static_cast<std::size_t>(j)] = true;
  PatrollingGraph g;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (used[i]) g.add_node({static_cast<NodeId>(i), points[i], o.priority, o.visit_radius});
  for (const auto& [i, j, c] : edges) g.add_edge(i, j, c);
  if (g.empty()) throw GraphDisconnectedError("no waypoint pair can be connected", {});
  g.require_connected();
  return g;
}

PathProbe make_planner_probe(const TerrainMap& map, const Params& params, std::uint64_t seed) {
  auto free_map = std::make_shared<TraversableMap>(build_traversable_map(map, {}, Vec3::Zero(), params));
  auto rng = std::make_shared<Rng>(Rng::derive(seed, 0x9a7, 0));
  return [free_map, rng, params](const Vec3& a, const Vec3& b) -> std::optional<double> {
    const auto path = randomized_astar(a, b, *free_map, params, *rng, params.R_v);
    if (!path) return std::nullopt;
    return path->length();
  };
}

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

}  // namespace

PatrollingGraph build_from_trajectories(const std::vector<std::vector<Vec3>>& trajectories, double sample_step,
                                        double voxel_size, const TrajectoryGraphOptions& o) {
  if (trajectories.empty()) throw std::invalid_argument("no trajectories given");
  if (!(sample_step > 0.0) || !(voxel_size > 0.0)) throw std::invalid_argument("sample step and voxel size must be > 0");
  // uniform arc-length sampling
  std::vector<Vec3> samples;
  for (const auto& traj : trajectories) {
    if (traj.empty()) throw std::invalid_argument("empty trajectory");
    samples.push_back(traj.front());
    double since = 0.0;
    for (std::size_t k = 1; k < traj.size(); ++k) {
      Vec3 a = traj[k - 1];
      const Vec3& b = traj[k];
      double seg = (b - a).norm();
      while (since + seg >= sample_step && seg > 0.0) {
        const double need = sample_step - since;
        a = a + (b - a) * (need / seg);
        samples.push_back(a);
        seg -= need;
        since = 0.0;
      }
      since += seg;
    }
  }
  // voxel grid filter: one centroid per occupied voxel, in voxel-key order
  std::map<std::tuple<long, long, long>, std::pair<Vec3, int>> voxels;
  for (const auto& p : samples) {
    const auto key = std::make_tuple(static_cast<long>(std::floor(p.x() / voxel_size)),
                                     static_cast<long>(std::floor(p.y() / voxel_size)),
                                     static_cast<long>(std::floor(p.z() / voxel_size)));
    auto& v = voxels.try_emplace(key, Vec3::Zero(), 0).first->second;
    v.first += p;
    ++v.second;
  }
  std::vector<Vec3> pts;
  for (auto& [_, v] : voxels) pts.push_back(v.first / v.second);

  PatrollingGraph g;
  for (std::size_t i = 0; i < pts.size(); ++i) g.add_node({static_cast<NodeId>(i), pts[i], o.priority, o.visit_radius});
  DisjointSets sets(pts.size());
  const KdTree tree(pts);
  double radius = o.initial_radius > 0.0 ? o.initial_radius : 2.0 * voxel_size;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (auto j : tree.radius(pts[i], radius))
      if (j > i) {
        g.add_edge(static_cast<NodeId>(i), static_cast<NodeId>(j), std::max(1e-6, distance(pts[i], pts[j])));
        sets.unite(i, j);
      }
  for (int it = 0; it < o.max_iterations; ++it) {
    std::map<std::size_t, int> roots;
    for (std::size_t i = 0; i < pts.size(); ++i) roots[sets.find(i)]++;
    if (roots.size() <= 1) break;
    radius *= o.growth;
    // closest pair between every two components, linked when within the radius
    std::map<std::pair<std::size_t, std::size_t>, std::tuple<double, std::size_t, std::size_t>> best;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (auto j : tree.radius(pts[i], radius)) {
        const std::size_t ri = sets.find(i), rj = sets.find(j);
        if (ri >= rj) continue;
        const double d = distance(pts[i], pts[j]);
        auto it2 = best.find({ri, rj});
        if (it2 == best.end() || d < std::get<0>(it2->second)) best[{ri, rj}] = {d, i, j};
      }
    for (const auto& [_, e] : best) {
      const auto [d, i, j] = e;
      g.add_edge(static_cast<NodeId>(i), static_cast<NodeId>(j), std::max(1e-6, d));
      sets.unite(i, j);
    }
  }
  g.require_connected();
  return g;
}

}  // namespace patrol
