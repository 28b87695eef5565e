#pragma once

#include "patrol/path.hpp"
#include "patrol/patrol_graph.hpp"
#include "patrol/rng.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace patrol {

enum class MessageKind { reached, visited, planned, selected, path, aborted, idleness };

const char* to_string(MessageKind kind);
/// Throws InputError for unknown names.
MessageKind message_kind_from_string(const std::string& name);

/// Broadcast message <robot_id, timestamp, type, data>. Only the payload fields
/// that belong to `kind` are meaningful; `validate` enforces that.
struct Message {
  RobotId sender = 0;
  double timestamp = 0.0;
  MessageKind kind = MessageKind::reached;
  NodeId node = -1;
  double cost = 0.0;
  std::vector<Vec3> path;
  std::vector<double> last_visits;  // idleness payload, one last-visit time per node

  static Message make(RobotId r, double t, MessageKind kind, NodeId n = -1, double c = 0.0) {
    Message m;
    m.sender = r;
    m.timestamp = t;
    m.kind = kind;
    m.node = n;
    m.cost = c;
    return m;
  }
  static Message reached(RobotId r, double t, NodeId n) { return make(r, t, MessageKind::reached, n); }
  static Message visited(RobotId r, double t, NodeId n) { return make(r, t, MessageKind::visited, n); }
  static Message planned(RobotId r, double t, NodeId n) {
    return make(r, t, MessageKind::planned, n, std::numeric_limits<double>::infinity());
  }
  static Message selected(RobotId r, double t, NodeId n, double c) { return make(r, t, MessageKind::selected, n, c); }
  static Message aborted(RobotId r, double t, NodeId n) { return make(r, t, MessageKind::aborted, n); }
  static Message path_update(RobotId r, double t, std::vector<Vec3> waypoints, double c) {
    Message m = make(r, t, MessageKind::path, -1, c);
    m.path = std::move(waypoints);
    return m;
  }
  static Message idleness_update(RobotId r, double t, std::vector<double> last_visits) {
    Message m = make(r, t, MessageKind::idleness);
    m.last_visits = std::move(last_visits);
    return m;
  }

  /// Throws std::invalid_argument when the payload does not match the kind.
  void validate() const;
};

/// Tab-separated log line: t sender kind node cost; path and idleness payloads
/// are summarized by their length in the cost column.
std::string format_message(const Message& msg, double t);

/// Per-link delivery probabilities (symmetric) and a fixed delay.
class LinkModel {
 public:
  LinkModel() = default;
  LinkModel(std::size_t robots, double delivery_prob, double delay);

  std::size_t robots() const { return robots_; }
  double delay() const { return delay_; }
  double probability(RobotId i, RobotId j) const { return prob_[index(i, j)]; }
  /// Sets P_ij and P_ji together.
  void set_probability(RobotId i, RobotId j, double p);

 private:
  std::size_t index(RobotId i, RobotId j) const;
  std::size_t robots_ = 0;
  double delay_ = 0.0;
  std::vector<double> prob_;
};

struct Delivery {
  double deliver_at = 0.0;
  RobotId receiver = 0;
  Message message;
};

/// Messages in transit, ordered by delivery time then enqueue order.
class InFlightQueue {
 public:
  void push(double deliver_at, RobotId receiver, Message msg);
  /// Removes and returns everything due at or before t (within 1e-9 s, so
  /// delays that are tick multiples are not lost to rounding).
  std::vector<Delivery> drain(double t);
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::map<std::pair<double, std::uint64_t>, Delivery> entries_;
  std::uint64_t seq_ = 0;
};

/// One Bernoulli draw per peer in id order; returns the number enqueued.
std::size_t broadcast(const LinkModel& link, InFlightQueue& queue, const Message& msg, double t, Rng& rng);

}  // namespace patrol
