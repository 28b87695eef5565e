#include "patrol/terrain.hpp"

#include "patrol/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace patrol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct PlaneFit {
  Vec3 centroid = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();  // oriented with non-negative z
};

template <typename Get>
PlaneFit fit_plane(std::size_t n, Get&& get) {
  PlaneFit fit;
  for (std::size_t k = 0; k < n; ++k) fit.centroid += get(k);
  fit.centroid /= static_cast<double>(n);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3 d = get(k) - fit.centroid;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  fit.normal = es.eigenvectors().col(0);  // eigenvalues ascending
  if (fit.normal.z() < 0.0) fit.normal = -fit.normal;
  return fit;
}

}  // namespace

const char* to_string(Label label) {
  switch (label) {
    case Label::terrain: return "terrain";
    case Label::wall: return "wall";
    case Label::surmountable: return "surmountable";
    case Label::ramp: return "ramp";
  }
  return "?";
}

std::optional<Label> label_from_string(const std::string& name) {
  if (name == "terrain") return Label::terrain;
  if (name == "wall") return Label::wall;
  if (name == "ramp") return Label::ramp;
  if (name == "surmountable" || name == "surmountable_obstacle") return Label::surmountable;
  return std::nullopt;
}

TerrainMap::TerrainMap(std::vector<Vec3> points, std::vector<Label> labels, double eps)
    : points_(std::move(points)), labels_(std::move(labels)), eps_(eps) {
  if (points_.empty()) throw InputError("terrain map has no points");
  if (labels_.size() != points_.size()) throw std::invalid_argument("terrain map: one label per point required");
  if (!(eps_ > 0.0)) throw std::invalid_argument("terrain map: eps must be > 0");
  tree_ = KdTree(points_);
  std::vector<Vec3> wall_pts;
  for (std::size_t i = 0; i < points_.size(); ++i)
    if (labels_[i] == Label::wall) wall_pts.push_back(points_[i]);
  walls_ = KdTree(wall_pts);

  const std::size_t n = points_.size();
  wall_clearance_.assign(n, kInf);
  w_dn_.assign(n, 0.0);
  w_rg_.assign(n, 0.0);
  std::vector<std::size_t> counts(n);
  std::vector<std::vector<std::uint32_t>> hoods(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!walls_.empty()) wall_clearance_[i] = walls_.nearest(points_[i]).second;
    hoods[i] = neighborhood(points_[i], eps_);
    counts[i] = hoods[i].size();
  }
  std::vector<std::size_t> sorted = counts;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n / 2), sorted.end());
  n_ref_ = std::max<double>(1.0, static_cast<double>(sorted[n / 2]));
  std::vector<Vec3> nb;
  for (std::size_t i = 0; i < n; ++i) {
    w_dn_[i] = patrol::density_weight(static_cast<double>(counts[i]), n_ref_);
    nb.clear();
    for (auto j : hoods[i]) nb.push_back(points_[j]);
    w_rg_[i] = patrol::roughness_weight(nb, eps_);
  }
}

std::vector<std::uint32_t> TerrainMap::neighborhood(const Vec3& p, double eps) const {
  auto idx = tree_.radius(p, eps);
  std::erase_if(idx, [&](std::uint32_t j) { return points_[j] == p; });
  return idx;
}

std::vector<Label> segment(std::span<const Vec3> points, int k_nn) {
  if (k_nn < 3) throw InputError("segmentation needs k_nn >= 3");
  if (points.size() < static_cast<std::size_t>(k_nn))
    throw InputError("segmentation needs at least " + std::to_string(k_nn) + " points, got " +
                     std::to_string(points.size()));
  const KdTree tree(points);
  const double deg = 180.0 / std::numbers::pi;
  std::vector<Label> labels(points.size(), Label::terrain);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto nb = tree.knn(points[i], static_cast<std::size_t>(k_nn));
    const PlaneFit fit = fit_plane(nb.size(), [&](std::size_t k) { return points[nb[k]]; });
    const double tilt = std::acos(std::min(1.0, std::abs(fit.normal.z()))) * deg;
    if (tilt > 60.0) labels[i] = Label::wall;
    else if (tilt > 20.0) labels[i] = Label::ramp;
  }
  // small bumps: height above a plane fitted to the lower half of the
  // surrounding non-wall points
  constexpr double kGroundRadius = 1.0, kMinBump = 0.05, kMaxBump = 0.15;
  std::vector<Vec3> ground;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (labels[i] == Label::wall) continue;
    ground.clear();
    for (auto j : tree.radius(points[i], kGroundRadius))
      if (labels[j] != Label::wall) ground.push_back(points[j]);
    if (ground.size() < 6) continue;
    std::vector<double> zs;
    for (const auto& g : ground) zs.push_back(g.z());
    std::nth_element(zs.begin(), zs.begin() + static_cast<std::ptrdiff_t>(zs.size() / 2), zs.end());
    const double zmed = zs[zs.size() / 2];
    std::erase_if(ground, [&](const Vec3& g) { return g.z() > zmed; });
    if (ground.size() < 3) continue;
    const PlaneFit fit = fit_plane(ground.size(), [&](std::size_t k) { return ground[k]; });
    const double h = (points[i] - fit.centroid).dot(fit.normal);
    if (h > kMinBump && h <= kMaxBump) labels[i] = Label::surmountable;
  }
  return labels;
}

TerrainMap read_map_file(const std::string& path, int k_nn, double eps) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open map file '" + path + "'");
  std::vector<Vec3> pts;
  std::vector<std::optional<Label>> given;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    double x, y, z;
    if (!(ss >> x)) continue;
    if (!(ss >> y >> z)) throw InputError(path + ":" + std::to_string(lineno) + ": expected x y z [label]");
    std::string name;
    std::optional<Label> label;
    if (ss >> name) {
      label = label_from_string(name);
      if (!label) throw InputError(path + ":" + std::to_string(lineno) + ": unknown label '" + name + "'");
    }
    pts.emplace_back(x, y, z);
    given.push_back(label);
  }
  if (pts.empty()) throw InputError("map file '" + path + "' has no points");
  std::vector<Label> labels(pts.size(), Label::terrain);
  const bool all_labeled = std::all_of(given.begin(), given.end(), [](const auto& l) { return l.has_value(); });
  if (!all_labeled) labels = segment(pts, k_nn);
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (given[i]) labels[i] = *given[i];
  return TerrainMap(std::move(pts), std::move(labels), eps);
}

void write_map_file(const std::string& path, const TerrainMap& map) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write map file '" + path + "'");
  out.precision(17);
  for (std::size_t i = 0; i < map.size(); ++i) {
    const auto& p = map.point(i);
    out << p.x() << ' ' << p.y() << ' ' << p.z() << ' ' << to_string(map.label(i)) << '\n';
  }
}

double density_weight(const TerrainMap& map, const Vec3& p, double eps) {
  return density_weight(static_cast<double>(map.neighborhood(p, eps).size()), map.density_reference());
}

double roughness_weight(std::span<const Vec3> neighbors, double eps) {
  if (neighbors.size() < 3) return 1.0;
  const PlaneFit fit = fit_plane(neighbors.size(), [&](std::size_t k) { return neighbors[k]; });
  std::vector<double> dist(neighbors.size());
  double sq = 0.0;
  for (std::size_t k = 0; k < neighbors.size(); ++k) {
    dist[k] = std::abs((neighbors[k] - fit.centroid).dot(fit.normal));
    sq += dist[k] * dist[k];
  }
  const double sigma = std::sqrt(sq / static_cast<double>(neighbors.size()));
  double sum = 0.0;
  std::size_t outliers = 0;
  for (double d : dist)
    if (d > sigma) {
      sum += d;
      ++outliers;
    }
  if (outliers == 0) return 0.0;
  return std::min(1.0, sum / static_cast<double>(outliers) / eps);
}

double roughness_weight(const TerrainMap& map, const Vec3& p, double eps) {
  std::vector<Vec3> nb;
  for (auto j : map.neighborhood(p, eps)) nb.push_back(map.point(j));
  return roughness_weight(nb, eps);
}

double label_weight(Label label, const Params& params) {
  switch (label) {
    case Label::terrain: return params.w_terrain;
    case Label::ramp: return params.w_ramp;
    case Label::surmountable: return params.w_surmountable;
    case Label::wall: return kInf;
  }
  return kInf;
}

FutureTrail future_trail(int robot_id, const Vec3& pose, std::span<const Vec3> path, double R_c, double R_b) {
  if (!(R_c > 0.0) || !(R_b > 0.0)) throw std::invalid_argument("future trail radii must be > 0");
  FutureTrail trail{robot_id, {pose}, R_b};
  const double step = 0.5 * R_b;
  Vec3 a = pose;
  for (const Vec3& b : path) {
    const double len = (b - a).norm();
    if (len < 1e-12) continue;
    const int n = static_cast<int>(std::ceil(len / step));
    for (int k = 1; k <= n; ++k) {
      const Vec3 q = a + (b - a) * (static_cast<double>(k) / n);
      if ((q - pose).norm() > R_c) {
        // close the trail where the last sample-to-q segment crosses the sphere
        const Vec3 s = trail.centers.back();
        const Vec3 d = q - s;
        const Vec3 f = s - pose;
        const double A = d.squaredNorm(), B = 2.0 * f.dot(d), C = f.squaredNorm() - R_c * R_c;
        const double u = std::clamp((-B + std::sqrt(std::max(0.0, B * B - 4 * A * C))) / (2 * A), 0.0, 1.0);
        Vec3 x = s + u * d;
        const double r = (x - pose).norm();
        if (r > R_c) x = pose + (x - pose) * (R_c / r);
        trail.centers.push_back(x);
        return trail;
      }
      trail.centers.push_back(q);
    }
    a = b;
  }
  return trail;
}

bool trail_is_near(const FutureTrail& trail, const Vec3& self_pos, double R_t) {
  for (const auto& c : trail.centers)
    if ((c - self_pos).norm() <= R_t + trail.radius) return true;
  return false;
}

double trail_clearance(const Vec3& p, const FutureTrail& trail) {
  double best = kInf;
  for (const auto& c : trail.centers) best = std::min(best, std::max(0.0, (p - c).norm() - trail.radius));
  return best;
}

ClearanceContext::ClearanceContext(const TerrainMap& m, std::span<const FutureTrail> all_trails,
                                   const Vec3& self_pos, double R_t, std::vector<Vec3> dyn)
    : map(&m), dynamic_obstacles(std::move(dyn)), dynamic_tree(dynamic_obstacles) {
  for (const auto& t : all_trails)
    if (trail_is_near(t, self_pos, R_t)) trails.push_back(t);
}

double ClearanceContext::clearance(std::size_t i) const {
  const Vec3& p = map->point(i);
  double best = map->wall_clearance(i);
  if (!dynamic_tree.empty()) best = std::min(best, dynamic_tree.nearest(p).second);
  for (const auto& t : trails) best = std::min(best, trail_clearance(p, t));
  return best;
}

double ClearanceContext::clearance(const Vec3& p) const {
  double best = map->walls().empty() ? kInf : map->walls().nearest(p).second;
  if (!dynamic_tree.empty()) best = std::min(best, dynamic_tree.nearest(p).second);
  for (const auto& t : trails) best = std::min(best, trail_clearance(p, t));
  return best;
}

double multi_robot_clearance(const Vec3& p, const TerrainMap& map, std::span<const FutureTrail> trails,
                             const Vec3& self_pos, double R_t, std::span<const Vec3> dynamic_obstacles) {
  const ClearanceContext ctx(map, trails, self_pos, R_t, {dynamic_obstacles.begin(), dynamic_obstacles.end()});
  return ctx.clearance(p);
}

std::optional<std::uint32_t> TraversableMap::nearest(const Vec3& p, double max_dist) const {
  std::optional<std::uint32_t> best;
  double best_d = kInf;
  for (auto j : base_->tree().radius(p, max_dist)) {
    if (!mask_[j]) continue;
    const double d = (base_->point(j) - p).norm();
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

std::vector<std::uint32_t> TraversableMap::within(const Vec3& p, double r) const {
  auto idx = base_->tree().radius(p, r);
  std::erase_if(idx, [&](std::uint32_t j) { return !mask_[j]; });
  return idx;
}

TraversableMap build_traversable_region(const TerrainMap& map, const ClearanceContext& ctx, const Params& params,
                                        const OrientedBox* region, std::uint64_t generation) {
  TraversableMap tm;
  tm.base_ = &map;
  tm.generation_ = generation;
  if (region) tm.region_ = *region;
  const std::size_t n = map.size();
  tm.mask_.assign(n, 0);
  tm.trav_.assign(n, kInf);
  tm.clearance_.assign(n, 0.0);
  std::vector<std::uint32_t> candidates;
  if (region) {
    candidates = map.tree().radius(region->center(), region->bounding_radius());
    std::erase_if(candidates, [&](std::uint32_t j) { return !region->contains(map.point(j)); });
  } else {
    candidates.resize(n);
    for (std::size_t i = 0; i < n; ++i) candidates[i] = static_cast<std::uint32_t>(i);
  }
  const double exclusion = params.exclusion_radius();
  tm.trav_min_ = kInf;
  tm.trav_max_ = 0.0;
  for (auto i : candidates) {
    if (map.label(i) == Label::wall) continue;
    const double c = ctx.clearance(i);
    if (!(c > exclusion)) continue;
    const double t = traversability_cost(label_weight(map.label(i), params), clearance_penalty(c, params.D_s),
                                         map.density_weight(i), map.roughness_weight(i));
    tm.mask_[i] = 1;
    tm.trav_[i] = t;
    tm.clearance_[i] = c;
    tm.indices_.push_back(i);
    tm.trav_min_ = std::min(tm.trav_min_, t);
    tm.trav_max_ = std::max(tm.trav_max_, t);
  }
  if (tm.indices_.empty()) tm.trav_min_ = tm.trav_max_ = 0.0;
  return tm;
}

TraversableMap build_traversable_map(const TerrainMap& map, std::span<const FutureTrail> trails,
                                     const Vec3& self_pos, const Params& params, std::vector<Vec3> dynamic_obstacles,
                                     std::uint64_t generation) {
  const ClearanceContext ctx(map, trails, self_pos, params.R_t, std::move(dynamic_obstacles));
  auto tm = build_traversable_region(map, ctx, params, nullptr, generation);
  if (tm.empty()) throw Error("traversable map is empty: robot is enclosed");
  return tm;
}

}  // namespace patrol
