#include "patrol/shared_knowledge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace patrol {

IdlenessVector::IdlenessVector(RobotId owner, const PatrollingGraph& graph, double t0) : owner_(owner) {
  for (const auto& n : graph.nodes()) {
    last_visits_.push_back(t0);
    priorities_.push_back(n.priority);
  }
}

IdlenessVector::IdlenessVector(RobotId owner, std::vector<double> last_visits, std::vector<double> priorities)
    : owner_(owner), last_visits_(std::move(last_visits)), priorities_(std::move(priorities)) {
  if (last_visits_.size() != priorities_.size())
    throw std::invalid_argument("idleness vector: last visits and priorities differ in length");
}

double IdlenessVector::idleness(std::size_t k, double t) const {
  return priorities_.at(k) * std::max(0.0, t - last_visits_.at(k));
}

std::vector<double> IdlenessVector::idlenesses(double t) const {
  std::vector<double> out(size());
  for (std::size_t k = 0; k < size(); ++k) out[k] = idleness(k, t);
  return out;
}

void IdlenessVector::mark_visited(std::size_t k, double t) { last_visits_.at(k) = std::max(last_visits_.at(k), t); }

void IdlenessVector::merge(const std::vector<double>& other) {
  if (other.size() != last_visits_.size())
    throw std::invalid_argument("idleness vectors differ in length (" + std::to_string(last_visits_.size()) +
                                " vs " + std::to_string(other.size()) + ")");
  for (std::size_t k = 0; k < other.size(); ++k) last_visits_[k] = std::max(last_visits_[k], other[k]);
}

IdlenessVector synchronize_idleness(const IdlenessVector& local, const IdlenessVector& received) {
  IdlenessVector out = local;
  out.merge(received.last_visits());
  return out;
}

TeamModel::TeamModel(RobotId owner, std::size_t robots) : owner_(owner), entries_(robots) {
  for (std::size_t r = 0; r < robots; ++r) entries_[r].robot_id = static_cast<RobotId>(r);
}

TeamModelEntry& TeamModel::entry(RobotId r) {
  if (r < 0 || static_cast<std::size_t>(r) >= entries_.size()) throw std::out_of_range("robot id outside team model");
  return entries_[static_cast<std::size_t>(r)];
}

const TeamModelEntry& TeamModel::entry(RobotId r) const { return const_cast<TeamModel*>(this)->entry(r); }

void expire_entries(TeamModel& model, double t, double T_exp) {
  for (std::size_t r = 0; r < model.size(); ++r) {
    auto& e = model.entry(static_cast<RobotId>(r));
    if (t - e.timestamp > T_exp) e.reset();
  }
}

ConflictResult detect_node_conflict(RobotId self_id, NodeId self_goal, double self_cost, const TeamModel& model) {
  for (const auto& e : model.entries()) {
    if (e.robot_id == self_id || !e.goal || *e.goal != self_goal) continue;
    const double c = e.travel_cost.value_or(std::numeric_limits<double>::infinity());
    if (self_cost > c || (self_cost == c && self_id > e.robot_id)) return {true, e.robot_id};
  }
  return {};
}

SharedKnowledge::SharedKnowledge(RobotId owner, std::size_t robots, const PatrollingGraph& graph, double t0)
    : idleness(owner, graph, t0), team(owner, robots), trails(robots) {}

bool SharedKnowledge::apply(const Message& msg, double t, const PatrollingGraph& graph) {
  if (msg.sender == team.owner()) throw std::invalid_argument("robot received its own message");
  auto& e = team.entry(msg.sender);
  const bool names_node = msg.kind != MessageKind::path && msg.kind != MessageKind::idleness;
  if (names_node && !graph.contains(msg.node)) {
    ++dropped_messages;
    return false;
  }
  const bool touches_entry = msg.kind != MessageKind::visited && msg.kind != MessageKind::idleness;
  if (touches_entry && msg.timestamp < e.timestamp) {
    ++dropped_messages;
    return false;
  }
  switch (msg.kind) {
    case MessageKind::reached:
      idleness.mark_visited(graph.index_of(msg.node), t);
      e.reset();
      e.timestamp = msg.timestamp;
      break;
    case MessageKind::visited:
      idleness.mark_visited(graph.index_of(msg.node), t);
      break;
    case MessageKind::planned:
      e.reset();
      e.goal = msg.node;
      e.travel_cost = std::numeric_limits<double>::infinity();
      e.timestamp = msg.timestamp;
      break;
    case MessageKind::selected:
      if (e.goal != msg.node) e.path.reset();
      e.goal = msg.node;
      e.travel_cost = msg.cost;
      e.timestamp = msg.timestamp;
      break;
    case MessageKind::path: {
      auto& trail = trails.at(static_cast<std::size_t>(msg.sender));
      if (trail && msg.timestamp < trail->timestamp) {
        ++dropped_messages;
        return false;
      }
      trail = TrailRecord{msg.path, msg.timestamp};
      traversability_dirty = true;
      // a single-point path is a position beacon, not a plan
      if (e.goal && msg.path.size() >= 2) {
        e.path = msg.path;
        e.travel_cost = msg.cost;
        e.timestamp = msg.timestamp;
      }
      break;
    }
    case MessageKind::aborted:
      e.reset();
      e.timestamp = msg.timestamp;
      break;
    case MessageKind::idleness:
      idleness.merge(msg.last_visits);
      break;
  }
  return true;
}

void SharedKnowledge::expire(double t, double T_exp) {
  expire_entries(team, t, T_exp);
  for (auto& tr : trails)
    if (tr && t - tr->timestamp > T_exp) {
      tr.reset();
      traversability_dirty = true;
    }
}

std::vector<std::pair<RobotId, const TrailRecord*>> SharedKnowledge::teammate_trails() const {
  std::vector<std::pair<RobotId, const TrailRecord*>> out;
  for (std::size_t r = 0; r < trails.size(); ++r)
    if (trails[r] && static_cast<RobotId>(r) != team.owner()) out.emplace_back(static_cast<RobotId>(r), &*trails[r]);
  return out;
}

}  // namespace patrol
