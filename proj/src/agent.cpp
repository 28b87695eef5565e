#include "patrol/agent.hpp"

#include "patrol/errors.hpp"

#include <algorithm>
#include <cctype>

namespace patrol {

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::CC: return "cc";
    case Strategy::CwMC: return "cwmc";
    case Strategy::NoCC: return "nocc";
  }
  return "?";
}

Strategy strategy_from_string(const std::string& name) {
  std::string s;
  for (char c : name)
    if (c != '-' && c != '_') s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "cc") return Strategy::CC;
  if (s == "cwmc") return Strategy::CwMC;
  if (s == "nocc") return Strategy::NoCC;
  throw InputError("unknown strategy '" + name + "' (expected cc, cwmc or nocc)");
}

StrategyToggles strategy_wiring(Strategy s) {
  switch (s) {
    case Strategy::CC: return {true, true, true};
    case Strategy::CwMC: return {false, true, true};
    case Strategy::NoCC: return {true, false, false};
  }
  return {};
}

std::vector<NodeId> build_search_set(const PatrollingGraph& graph, NodeId current, std::optional<NodeId> contended) {
  auto out = neighbors_at_depth(graph, current, 1);
  if (contended) std::erase(out, *contended);
  return out;
}

NodeId compute_next_best_node(std::span<const NodeId> candidates, const PatrollingGraph& graph,
                              const IdlenessVector& idleness, double t) {
  if (candidates.empty()) throw std::invalid_argument("no candidate goal nodes");
  NodeId best = candidates[0];
  double best_idl = idleness.idleness(graph.index_of(best), t);
  for (NodeId n : candidates.subspan(1)) {
    const double idl = idleness.idleness(graph.index_of(n), t);
    if (idl > best_idl || (idl == best_idl && n < best)) {
      best = n;
      best_idl = idl;
    }
  }
  return best;
}

NodeId compute_random_node(const PatrollingGraph& graph, NodeId current, int streak, int d_full, Rng& rng,
                           std::optional<NodeId> exclude) {
  std::vector<NodeId> pool;
  if (streak >= d_full) {
    for (const auto& n : graph.nodes()) pool.push_back(n.id);
  } else {
    pool = neighbors_at_depth(graph, current, std::max(1, streak));
  }
  if (exclude) std::erase(pool, *exclude);
  if (pool.empty()) {
    for (const auto& n : graph.nodes())
      if (n.id != current && (!exclude || n.id != *exclude)) pool.push_back(n.id);
  }
  if (pool.empty()) return current;
  return pool[rng.index(pool.size())];
}

Agent::Agent(RobotId id, std::size_t robots, const PatrollingGraph& graph, const Params& params, Strategy strategy,
             Rng rng, const Vec3& start, double t0)
    : id_(id),
      graph_(&graph),
      params_(params),
      strategy_(strategy),
      toggles_(strategy_wiring(strategy)),
      rng_(std::move(rng)),
      knowledge_(id, robots, graph, t0),
      current_(graph.nearest_node(start)),
      last_idleness_broadcast_(t0 - params.T_idln),
      now_(t0) {}

double Agent::travel_cost() const {
  if (planner_length_) return *planner_length_;
  if (!goal_) return 0.0;
  return graph_->shortest_costs(current_)[graph_->index_of(*goal_)];
}

std::vector<Message> Agent::update(double t, const Vec3& pose, std::span<const Message> received,
                                   const std::optional<PlannerStatus>& status) {
  now_ = t;
  std::vector<Message> out;
  flags_.goal_visited = false;
  for (const auto& msg : received) {
    const bool teammate_visit = msg.kind == MessageKind::visited || msg.kind == MessageKind::reached;
    if (!toggles_.shared_idleness && (teammate_visit || msg.kind == MessageKind::idleness)) continue;
    if (!toggles_.node_conflicts && msg.kind != MessageKind::path && !teammate_visit) continue;
    if (knowledge_.apply(msg, t, *graph_) && teammate_visit && goal_ && msg.node == *goal_) flags_.goal_visited = true;
  }
  knowledge_.expire(t, params_.T_exp);

  // own visits: the estimate stays zero while inside; entering a ball is an event
  std::vector<NodeId> now_inside = graph_->nodes_containing(pose);
  flags_.node_visited = false;
  for (NodeId n : now_inside) {
    knowledge_.idleness.mark_visited(graph_->index_of(n), t);
    const bool entered = std::find(inside_.begin(), inside_.end(), n) == inside_.end();
    if (!entered) continue;
    current_ = n;
    if (!goal_ || n != *goal_) {
      flags_.node_visited = true;
      out.push_back(Message::visited(id_, t, n));
    }
  }
  inside_ = std::move(now_inside);

  if (status) {
    switch (status->kind) {
      case StatusKind::reached:
        flags_.goal_reached = true;
        if (goal_) current_ = *goal_;
        break;
      case StatusKind::failure:
        flags_.path_planning_failure = true;
        if (!failure_since_) failure_since_ = t;
        break;
      case StatusKind::success:
        failure_since_.reset();
        planner_length_ = status->cost;
        break;
    }
  }
  flags_.critical_path_planning_failure =
      flags_.path_planning_failure && failure_since_ && t - *failure_since_ >= params_.T_pcr;

  flags_.node_conflict = false;
  if (toggles_.node_conflicts && goal_ && !flags_.goal_reached) {
    ++team_goal_reads_;
    const auto c = detect_node_conflict(id_, *goal_, travel_cost(), knowledge_.team);
    flags_.node_conflict = c.conflict;
    if (c.conflict) {
      contended_ = *goal_;
      if (!conflict_since_) conflict_since_ = t;
    }
  }
  if (flags_.goal_reached || (!flags_.node_conflict && t - goal_since_ >= params_.T_ncr)) conflict_since_.reset();
  flags_.critical_node_conflict = flags_.node_conflict && conflict_since_ && t - *conflict_since_ >= params_.T_ncr;

  if (toggles_.shared_idleness && t - last_idleness_broadcast_ >= params_.T_idln - 1e-9) {
    last_idleness_broadcast_ = t;
    out.push_back(Message::idleness_update(id_, t, knowledge_.idleness.last_visits()));
  }
  return out;
}

NodeId Agent::plan_next_goal() {
  const bool critical = flags_.critical_path_planning_failure || flags_.critical_node_conflict;
  const std::optional<NodeId> exclude = flags_.node_conflict ? contended_ : std::nullopt;
  if (!critical) {
    critical_streak_ = 0;
    const auto set = build_search_set(*graph_, current_, exclude);
    if (!set.empty()) return compute_next_best_node(set, *graph_, knowledge_.idleness, now_);
  }
  ++critical_streak_;
  return compute_random_node(*graph_, current_, std::max(1, critical_streak_), params_.d_full, rng_, exclude);
}

std::optional<PlannerCommand> Agent::go_command() const {
  const Node& n = graph_->node(*goal_);
  return PlannerCommand::go(n.position, n.visit_radius);
}

AgentActions Agent::step(double t, const Vec3& pose) {
  (void)pose;
  AgentActions act;
  const bool replan = flags_.path_planning_failure || flags_.node_conflict || flags_.goal_visited;
  if (!flags_.goal_reached && !replan && t + 1e-9 < next_step_) return act;

  if (!goal_ || flags_.goal_reached || replan) {
    if (goal_ && flags_.goal_reached) {
      act.broadcasts.push_back(Message::reached(id_, t, *goal_));
    } else if (goal_) {
      act.abort_planner = true;
      act.broadcasts.push_back(Message::aborted(id_, t, *goal_));
    }
    const NodeId next = plan_next_goal();
    flags_.goal_reached = flags_.path_planning_failure = flags_.node_conflict = flags_.goal_visited = false;
    flags_.critical_path_planning_failure = flags_.critical_node_conflict = false;
    if (!toggles_.node_conflicts) contended_.reset();
    planner_length_.reset();
    goal_since_ = t;
    if (next == current_) {
      // every other node is contended: hold without a claim and retry after a sleep
      goal_.reset();
      next_step_ = t + params_.T_sleep;
      return act;
    }
    goal_ = next;
    act.broadcasts.push_back(Message::planned(id_, t, *goal_));
    act.go = go_command();
    return act;
  }
  act.broadcasts.push_back(Message::selected(id_, t, *goal_, travel_cost()));
  next_step_ = t + params_.T_sleep;
  return act;
}

}  // namespace patrol
