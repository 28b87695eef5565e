#pragma once

#include "patrol/network.hpp"
#include "patrol/patrol_graph.hpp"

#include <optional>
#include <vector>

namespace patrol {

/// A robot's estimate of every node's idleness, kept as last-visit times so a
/// min-merge of idlenesses becomes a max-merge of times.
class IdlenessVector {
 public:
  IdlenessVector() = default;
  IdlenessVector(RobotId owner, const PatrollingGraph& graph, double t0 = 0.0);
  IdlenessVector(RobotId owner, std::vector<double> last_visits, std::vector<double> priorities);

  RobotId owner() const { return owner_; }
  std::size_t size() const { return last_visits_.size(); }
  const std::vector<double>& last_visits() const { return last_visits_; }
  const std::vector<double>& priorities() const { return priorities_; }

  /// Idleness of the node at index k; never negative, even for t before the stored visit.
  double idleness(std::size_t k, double t) const;
  std::vector<double> idlenesses(double t) const;
  /// Zeroes the node at index k as of time t (never moves a visit time backwards).
  void mark_visited(std::size_t k, double t);
  /// In-place elementwise max of last-visit times.
  void merge(const std::vector<double>& other_last_visits);

  bool operator==(const IdlenessVector& o) const {
    return owner_ == o.owner_ && last_visits_ == o.last_visits_ && priorities_ == o.priorities_;
  }

 private:
  RobotId owner_ = 0;
  std::vector<double> last_visits_;
  std::vector<double> priorities_;
};

/// Elementwise minimum of idlenesses; keeps the local owner. Throws
/// std::invalid_argument on a length mismatch.
IdlenessVector synchronize_idleness(const IdlenessVector& local, const IdlenessVector& received);

struct TeamModelEntry {
  RobotId robot_id = 0;
  std::optional<NodeId> goal;
  std::optional<std::vector<Vec3>> path;
  std::optional<double> travel_cost;  // +inf for a planned goal
  double timestamp = 0.0;

  bool has_goal() const { return goal.has_value(); }
  void reset() {
    goal.reset();
    path.reset();
    travel_cost.reset();
  }
};

/// One entry per robot id of the team; the owner's own slot stays empty.
class TeamModel {
 public:
  TeamModel() = default;
  TeamModel(RobotId owner, std::size_t robots);

  RobotId owner() const { return owner_; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<TeamModelEntry>& entries() const { return entries_; }
  TeamModelEntry& entry(RobotId r);
  const TeamModelEntry& entry(RobotId r) const;

 private:
  RobotId owner_ = 0;
  std::vector<TeamModelEntry> entries_;
};

/// Resets every entry whose age is strictly greater than T_exp.
void expire_entries(TeamModel& model, double t, double T_exp);

struct ConflictResult {
  bool conflict = false;
  RobotId contender = -1;
};

/// Self loses the goal to teammate i when i holds the same goal with a lower
/// cost, or the same cost and a lower id.
ConflictResult detect_node_conflict(RobotId self_id, NodeId self_goal, double self_cost, const TeamModel& model);

/// Latest broadcast path of each teammate, kept apart from the goal tuple so
/// robots without a goal still publish where they stand.
struct TrailRecord {
  std::vector<Vec3> waypoints;
  double timestamp = 0.0;
};

/// Everything a robot knows about the team: idleness estimates, team model,
/// teammate paths.
struct SharedKnowledge {
  IdlenessVector idleness;
  TeamModel team;
  std::vector<std::optional<TrailRecord>> trails;  // indexed by robot id
  bool traversability_dirty = false;
  std::size_t dropped_messages = 0;  // unknown nodes or stale timestamps

  SharedKnowledge() = default;
  SharedKnowledge(RobotId owner, std::size_t robots, const PatrollingGraph& graph, double t0 = 0.0);

  /// Applies one received message with the broadcast-table semantics. Returns
  /// false when the message was dropped (stale, or naming an unknown node).
  /// Throws std::invalid_argument for messages from the owner itself.
  bool apply(const Message& msg, double t, const PatrollingGraph& graph);

  /// Expires team entries and trails older than T_exp.
  void expire(double t, double T_exp);

  /// Trails of teammates that are still fresh.
  std::vector<std::pair<RobotId, const TrailRecord*>> teammate_trails() const;
};

}  // namespace patrol
