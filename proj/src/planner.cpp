#include "patrol/planner.hpp"

#include <cmath>
#include <queue>
#include <tuple>

namespace patrol {

double mixed_step_cost(const Vec3& from, const Vec3& to, const Vec3& goal, double trav_to, double trav_min,
                       double trav_max, double lambda_z, double lambda_t, double eps, double omega2) {
  const double d = (to - from).norm();
  const double h = (goal - to).norm();
  const double dz = std::abs(to.z() - from.z());
  const double omega1 = lambda_t * (trav_to - trav_min) / (trav_max - trav_min + eps) + 1.0;
  return (d + h + lambda_z * dz) * omega1 * omega2;
}

std::optional<Path> randomized_astar(const Vec3& start, const Vec3& goal, const TraversableMap& map,
                                     const Params& params, Rng& rng, double tolerance, SearchStats* stats) {
  SearchStats local_stats;
  SearchStats& st = stats ? *stats : local_stats;
  st = {};
  if (map.empty()) return std::nullopt;
  const auto root = map.nearest(start, 2.0 * params.R_b);
  if (!root) return std::nullopt;
  const TerrainMap& base = map.base();
  if ((base.point(*root) - goal).norm() <= tolerance) return Path{{base.point(*root)}, {}};

  struct TreeNode {
    std::uint32_t point;
    std::int32_t parent;
    double g;
    double step;
  };
  std::vector<TreeNode> tree{{*root, -1, 0.0, 0.0}};
  std::vector<std::uint8_t> in_tree(base.size(), 0);
  in_tree[*root] = 1;
  using Item = std::tuple<double, std::uint64_t, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  std::uint64_t seq = 0;
  open.emplace(0.0, seq++, 0);

  auto reconstruct = [&](std::size_t leaf) {
    Path path;
    for (auto k = static_cast<std::int32_t>(leaf); k >= 0; k = tree[static_cast<std::size_t>(k)].parent) {
      path.waypoints.push_back(base.point(tree[static_cast<std::size_t>(k)].point));
      if (tree[static_cast<std::size_t>(k)].parent >= 0) path.step_costs.push_back(tree[static_cast<std::size_t>(k)].step);
    }
    std::reverse(path.waypoints.begin(), path.waypoints.end());
    std::reverse(path.step_costs.begin(), path.step_costs.end());
    return path;
  };

  st.budget = static_cast<std::size_t>(std::ceil(params.budget_factor * std::sqrt(static_cast<double>(map.size()))));
  std::vector<std::uint32_t> cand;
  std::vector<double> weight;
  while (!open.empty()) {
    if (st.expansions >= st.budget) {
      st.budget_hit = true;
      break;
    }
    const auto [g, _, idx] = open.top();
    open.pop();
    ++st.expansions;
    const TreeNode node = tree[idx];
    const Vec3& p = base.point(node.point);
    const double delta = std::min(map.clearance(node.point), params.max_step);
    cand.clear();
    weight.clear();
    for (auto j : map.within(p, delta)) {
      if (in_tree[j]) continue;
      cand.push_back(j);
      weight.push_back(1.0 / map.trav(j));
    }
    const std::size_t picks = std::min<std::size_t>(cand.size(), static_cast<std::size_t>(params.max_children));
    for (std::size_t k = 0; k < picks; ++k) {
      double total = 0.0;
      for (double w : weight) total += w;
      double r = rng.uniform() * total;
      std::size_t c = 0;
      while (c + 1 < weight.size() && r >= weight[c]) r -= weight[c++];
      const std::uint32_t child = cand[c];
      cand.erase(cand.begin() + static_cast<std::ptrdiff_t>(c));
      weight.erase(weight.begin() + static_cast<std::ptrdiff_t>(c));

      in_tree[child] = 1;
      const Vec3& q = base.point(child);
      const double step = mixed_step_cost(p, q, goal, map.trav(child), map.trav_min(), map.trav_max(),
                                           params.lambda_z, params.lambda_t, params.epsilon);
      tree.push_back({child, static_cast<std::int32_t>(idx), g + step, step});
      if ((q - goal).norm() <= tolerance) return reconstruct(tree.size() - 1);
      open.emplace(g + step, seq++, tree.size() - 1);
    }
  }
  return std::nullopt;
}

OrientedBox search_window(const Vec3& start, const Vec3& goal, const Params& params, int attempt) {
  const double half = 2.0 * params.R_b * std::ldexp(1.0, attempt);
  return OrientedBox::around_segment(start, goal, params.window_pad, half, half);
}

WindowedResult windowed_search(const Vec3& start, const Vec3& goal, const MapProvider& maps, const Params& params,
                               Rng& rng, double tolerance, int max_attempts) {
  if (max_attempts < 1) throw std::invalid_argument("windowed search needs at least one attempt");
  WindowedResult out;
  for (int a = 0; a < max_attempts; ++a) {
    out.attempts = a + 1;
    std::optional<OrientedBox> box;
    if (a + 1 < max_attempts) box = search_window(start, goal, params, a);
    const TraversableMap map = maps(box ? &*box : nullptr);
    out.path = randomized_astar(start, goal, map, params, rng, tolerance);
    if (out.path) {
      out.region = box;
      return out;
    }
  }
  return out;
}

void prune_passed_waypoints(const Vec3& pose, std::vector<Vec3>& waypoints) {
  std::size_t drop = 0;
  while (drop + 1 < waypoints.size()) {
    const Vec3& w0 = waypoints[drop];
    const Vec3& w1 = waypoints[drop + 1];
    if ((w0 - pose).norm() > 1e-12 && (w0 - pose).dot(w1 - w0) > 0.0) break;
    ++drop;
  }
  waypoints.erase(waypoints.begin(), waypoints.begin() + static_cast<std::ptrdiff_t>(drop));
}

std::optional<Path> local_replan(const Vec3& pose, const Path& global, std::size_t& progress, const Vec3& goal,
                                 double goal_tolerance, const MapProvider& maps, const Params& params, Rng& rng) {
  const auto& W = global.waypoints;
  if (W.empty()) throw std::invalid_argument("local replan needs a global path");
  const std::size_t n = W.size();
  progress = std::min(progress, n - 1);
  // the robot only moves forward along the global path; look a few meters ahead
  double best = (W[progress] - pose).norm();
  for (std::size_t k = progress + 1; k < n && k <= progress + 64; ++k) {
    const double d = (W[k] - pose).norm();
    if (d < best) {
      best = d;
      progress = k;
    }
  }
  std::size_t target = n - 1;
  for (std::size_t k = progress + 1; k < n; ++k)
    if ((W[k] - pose).norm() >= params.R_l) {
      target = k;
      break;
    }
  const bool to_goal = target == n - 1;
  const Vec3 aim = to_goal ? goal : W[target];
  const double tol = to_goal ? goal_tolerance : 0.5 * params.max_step;
  auto local = windowed_search(pose, aim, maps, params, rng, tol, params.window_attempts);
  if (!local.path) return std::nullopt;
  Path out = std::move(*local.path);
  if (!to_goal) {
    for (std::size_t k = target + 1; k < n; ++k) {
      out.step_costs.push_back(k - 1 < global.step_costs.size() ? global.step_costs[k - 1] : 0.0);
      out.waypoints.push_back(W[k]);
    }
  }
  return out;
}

void Planner::command(const PlannerCommand& cmd, double t) {
  tracking_.clear();
  global_ = {};
  progress_ = 0;
  attempts_ = 0;
  if (cmd.action == PlannerCommand::Action::abort) {
    state_ = State::idle;
    return;
  }
  state_ = State::initial;
  goal_ = cmd.goal;
  tolerance_ = cmd.tolerance;
  next_attempt_ = t;
}

std::optional<PlannerStatus> Planner::tick(const Vec3& pose, double t, const MapProvider& maps) {
  auto success = [&](std::vector<Vec3> waypoints) {
    prune_passed_waypoints(pose, waypoints);
    tracking_.assign(1, pose);
    tracking_.insert(tracking_.end(), waypoints.begin(), waypoints.end());
    PlannerStatus st;
    st.kind = StatusKind::success;
    st.path.waypoints = tracking_;
    st.cost = polyline_length(tracking_);
    return st;
  };
  auto failure = [&] {
    state_ = State::idle;
    tracking_.clear();
    return PlannerStatus{StatusKind::failure, {}, 0.0};
  };

  switch (state_) {
    case State::idle:
      tracking_.clear();
      return std::nullopt;
    case State::initial: {
      tracking_.clear();
      if (t + 1e-9 < next_attempt_) return std::nullopt;
      ++attempts_;
      auto r = windowed_search(pose, goal_, maps, params_, rng_, tolerance_, params_.window_attempts);
      if (r.path) {
        global_ = std::move(*r.path);
        progress_ = 0;
        state_ = State::tracking;
        return success(global_.waypoints);
      }
      if (attempts_ >= params_.l_max) return failure();
      next_attempt_ = t + params_.T_wait;
      return std::nullopt;
    }
    case State::tracking: {
      auto local = local_replan(pose, global_, progress_, goal_, tolerance_, maps, params_, rng_);
      if (!local) return failure();
      return success(std::move(local->waypoints));
    }
  }
  return std::nullopt;
}

std::optional<PlannerStatus> Planner::check_reached(const Vec3& pose) {
  if (state_ != State::tracking || (pose - goal_).norm() > tolerance_ + 1e-9) return std::nullopt;
  state_ = State::idle;
  tracking_.clear();
  return PlannerStatus{StatusKind::reached, {}, 0.0};
}

}  // namespace patrol
