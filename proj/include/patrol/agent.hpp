#pragma once

#include "patrol/network.hpp"
#include "patrol/params.hpp"
#include "patrol/patrol_graph.hpp"
#include "patrol/planner.hpp"
#include "patrol/rng.hpp"
#include "patrol/shared_knowledge.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace patrol {

/// CC: full strategy. CwMC: no teammate trails in the traversable map.
/// NoCC: no node-conflict management and no shared idleness.
enum class Strategy { CC, CwMC, NoCC };

const char* to_string(Strategy s);
/// Case-insensitive "cc", "cwmc", "nocc" / "no-cc"; throws InputError otherwise.
Strategy strategy_from_string(const std::string& name);

struct StrategyToggles {
  bool teammate_trails = true;
  bool node_conflicts = true;
  bool shared_idleness = true;  // idleness broadcasts and teammates' visited/reached
};
StrategyToggles strategy_wiring(Strategy s);

struct AgentFlags {
  bool goal_reached = true;
  bool node_conflict = false;
  bool goal_visited = false;
  bool path_planning_failure = false;
  bool critical_path_planning_failure = false;
  bool critical_node_conflict = false;
  bool node_visited = false;
};

/// Candidate goals: the current node's neighbours, minus the contended node.
std::vector<NodeId> build_search_set(const PatrollingGraph& graph, NodeId current,
                                     std::optional<NodeId> contended = std::nullopt);

/// Highest estimated idleness, ties to the lowest id. Throws
/// std::invalid_argument on an empty candidate set.
NodeId compute_next_best_node(std::span<const NodeId> candidates, const PatrollingGraph& graph,
                              const IdlenessVector& idleness, double t);

/// Uniform draw from the ring of nodes within `streak` hops of `current`
/// (streak >= 1); from `d_full` consecutive critical replans on, uniform over
/// the whole graph. `exclude` is never returned; when the ring is empty after
/// exclusion the draw is over the other nodes of the graph, and the current
/// node is returned only when nothing else is left.
NodeId compute_random_node(const PatrollingGraph& graph, NodeId current, int streak, int d_full, Rng& rng,
                           std::optional<NodeId> exclude = std::nullopt);

/// What the agent wants done this tick, in order: planner abort, broadcasts,
/// planner go.
struct AgentActions {
  bool abort_planner = false;
  std::vector<Message> broadcasts;
  std::optional<PlannerCommand> go;
};

class Agent {
 public:
  Agent(RobotId id, std::size_t robots, const PatrollingGraph& graph, const Params& params, Strategy strategy,
        Rng rng, const Vec3& start, double t0 = 0.0);

  /// Applies received messages and planner feedback, refreshes the flags and
  /// returns the messages Update broadcasts (visited nodes, periodic idleness).
  std::vector<Message> update(double t, const Vec3& pose, std::span<const Message> received,
                              const std::optional<PlannerStatus>& status);

  /// One pass of the agent loop body. `pose` is the robot position.
  AgentActions step(double t, const Vec3& pose);

  /// Goal selection; public for tests.
  NodeId plan_next_goal();

  RobotId id() const { return id_; }
  std::optional<NodeId> goal() const { return goal_; }
  NodeId current_node() const { return current_; }
  const AgentFlags& flags() const { return flags_; }
  const SharedKnowledge& knowledge() const { return knowledge_; }
  SharedKnowledge& knowledge() { return knowledge_; }
  Strategy strategy() const { return strategy_; }
  double travel_cost() const;
  int critical_streak() const { return critical_streak_; }
  std::optional<NodeId> contended() const { return contended_; }
  /// Number of times the agent read teammates' goals (stays 0 under NoCC).
  std::size_t team_goal_reads() const { return team_goal_reads_; }

 private:
  std::optional<PlannerCommand> go_command() const;

  RobotId id_;
  const PatrollingGraph* graph_;
  Params params_;
  Strategy strategy_;
  StrategyToggles toggles_;
  Rng rng_;
  SharedKnowledge knowledge_;
  AgentFlags flags_;
  std::optional<NodeId> goal_;
  NodeId current_;
  std::optional<NodeId> contended_;
  std::vector<NodeId> inside_;  // nodes whose ball contains the robot
  std::vector<NodeId> visited_en_route_;
  std::optional<double> failure_since_, conflict_since_;
  double goal_since_ = 0.0;
  double last_idleness_broadcast_;
  double next_step_ = 0.0;
  std::optional<double> planner_length_;
  int critical_streak_ = 0;
  std::size_t team_goal_reads_ = 0;
  double now_ = 0.0;
};

}  // namespace patrol
