#pragma once

#include "patrol/params.hpp"
#include "patrol/path.hpp"
#include "patrol/rng.hpp"
#include "patrol/terrain.hpp"

#include <functional>
#include <optional>

namespace patrol {

/// Mixed step cost (d + h + lambda_z |dz|) * omega1 * omega2, with
/// omega1 = lambda_t (trav - trav_min) / (trav_max - trav_min + eps) + 1.
double mixed_step_cost(const Vec3& from, const Vec3& to, const Vec3& goal, double trav_to, double trav_min,
                       double trav_max, double lambda_z, double lambda_t, double eps, double omega2 = 1.0);

struct SearchStats {
  std::size_t expansions = 0;
  std::size_t budget = 0;
  bool budget_hit = false;
};

/// Randomized A* over the points of `map`. The search tree grows from the
/// projection of `start`; each expansion collects the kept points within
/// min(clearance, max_step), samples up to max_children of them with weights
/// 1/trav, and queues them by accumulated mixed cost (insertion order breaks
/// ties). Succeeds when a child lands within `tolerance` of `goal`.
std::optional<Path> randomized_astar(const Vec3& start, const Vec3& goal, const TraversableMap& map,
                                     const Params& params, Rng& rng, double tolerance,
                                     SearchStats* stats = nullptr);

/// Produces the freshest traversable map, restricted to `region` when non-null.
using MapProvider = std::function<TraversableMap(const OrientedBox* region)>;

struct WindowedResult {
  std::optional<Path> path;
  int attempts = 0;  // attempts used, including the successful one
  std::optional<OrientedBox> region;  // box of the successful attempt; empty for the full map
};

/// Box around start-goal with a 4 R_b square cross-section and window_pad
/// longitudinal padding, doubled across per failed attempt; the last of
/// `max_attempts` uses the whole map.
OrientedBox search_window(const Vec3& start, const Vec3& goal, const Params& params, int attempt);
WindowedResult windowed_search(const Vec3& start, const Vec3& goal, const MapProvider& maps, const Params& params,
                               Rng& rng, double tolerance, int max_attempts);

/// Replans from `pose` to the first global waypoint at least R_l away after
/// `progress` (or to the goal if none is that far) and splices the rest of the
/// global path on. Returns the combined waypoints; `progress` is advanced to
/// the global waypoint closest to the robot.
std::optional<Path> local_replan(const Vec3& pose, const Path& global, std::size_t& progress, const Vec3& goal,
                                 double goal_tolerance, const MapProvider& maps, const Params& params, Rng& rng);

/// Drops leading waypoints the robot has already gone past.
void prune_passed_waypoints(const Vec3& pose, std::vector<Vec3>& waypoints);

enum class StatusKind { success, failure, reached };

struct PlannerStatus {
  StatusKind kind = StatusKind::success;
  Path path;          // success only
  double cost = 0.0;  // path length in meters, success only
};

struct PlannerCommand {
  enum class Action { go, abort } action = Action::abort;
  Vec3 goal = Vec3::Zero();
  double tolerance = 0.5;  // visit radius of the goal node

  static PlannerCommand go(const Vec3& goal, double tolerance) { return {Action::go, goal, tolerance}; }
  static PlannerCommand abort() { return {}; }
};

/// Path planning session for one robot, driven once per tick: initial global
/// attempts spaced by T_wait, then continuous local replanning until the goal
/// is reached, the plan fails, or the agent aborts.
class Planner {
 public:
  enum class State { idle, initial, tracking };

  Planner(const Params& params, Rng rng) : params_(params), rng_(std::move(rng)) {}

  void command(const PlannerCommand& cmd, double t);

  /// Plans for this tick. Returns the status emitted, if any.
  std::optional<PlannerStatus> tick(const Vec3& pose, double t, const MapProvider& maps);

  /// Called after the robot moved; emits `reached` once inside the goal ball.
  std::optional<PlannerStatus> check_reached(const Vec3& pose);

  State state() const { return state_; }
  bool has_goal() const { return state_ != State::idle; }
  const Vec3& goal() const { return goal_; }
  /// Path the robot should follow this tick, starting at its pose; empty when holding still.
  const std::vector<Vec3>& tracking() const { return tracking_; }
  int attempts() const { return attempts_; }
  const Path& global_path() const { return global_; }
  const Params& params() const { return params_; }

 private:
  Params params_;
  Rng rng_;
  State state_ = State::idle;
  Vec3 goal_ = Vec3::Zero();
  double tolerance_ = 0.5;
  int attempts_ = 0;
  double next_attempt_ = 0.0;
  Path global_;
  std::size_t progress_ = 0;
  std::vector<Vec3> tracking_;
};

}  // namespace patrol
