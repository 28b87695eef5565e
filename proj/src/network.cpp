#include "patrol/network.hpp"

#include "patrol/errors.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace patrol {

const char* to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::reached: return "reached";
    case MessageKind::visited: return "visited";
    case MessageKind::planned: return "planned";
    case MessageKind::selected: return "selected";
    case MessageKind::path: return "path";
    case MessageKind::aborted: return "aborted";
    case MessageKind::idleness: return "idleness";
  }
  return "?";
}

MessageKind message_kind_from_string(const std::string& name) {
  for (auto k : {MessageKind::reached, MessageKind::visited, MessageKind::planned, MessageKind::selected,
                 MessageKind::path, MessageKind::aborted, MessageKind::idleness})
    if (name == to_string(k)) return k;
  throw InputError("unknown message type '" + name + "'");
}

void Message::validate() const {
  auto bad = [&](const char* why) {
    throw std::invalid_argument(std::string(to_string(kind)) + " message: " + why);
  };
  const bool has_node = node >= 0;
  switch (kind) {
    case MessageKind::reached:
    case MessageKind::visited:
    case MessageKind::aborted:
      if (!has_node) bad("missing node");
      if (!path.empty() || !last_visits.empty()) bad("unexpected payload");
      break;
    case MessageKind::planned:
      if (!has_node) bad("missing node");
      if (!std::isinf(cost)) bad("planned cost must be infinite");
      if (!path.empty() || !last_visits.empty()) bad("unexpected payload");
      break;
    case MessageKind::selected:
      if (!has_node) bad("missing node");
      if (!(cost >= 0.0)) bad("cost must be >= 0");
      if (!path.empty() || !last_visits.empty()) bad("unexpected payload");
      break;
    case MessageKind::path:
      if (path.empty()) bad("empty path");
      if (has_node || !last_visits.empty()) bad("unexpected payload");
      break;
    case MessageKind::idleness:
      if (last_visits.empty()) bad("empty idleness vector");
      if (has_node || !path.empty()) bad("unexpected payload");
      break;
  }
}

std::string format_message(const Message& msg, double t) {
  std::ostringstream out;
  out.precision(12);
  out << t << '\t' << msg.sender << '\t' << to_string(msg.kind) << '\t';
  if (msg.node >= 0) out << msg.node;
  else out << '-';
  out << '\t';
  switch (msg.kind) {
    case MessageKind::selected: out << msg.cost; break;
    case MessageKind::planned: out << "inf"; break;
    case MessageKind::path: out << msg.path.size(); break;
    case MessageKind::idleness: out << msg.last_visits.size(); break;
    default: out << '-';
  }
  return out.str();
}

LinkModel::LinkModel(std::size_t robots, double delivery_prob, double delay)
    : robots_(robots), delay_(delay), prob_(robots * robots, delivery_prob) {
  if (delivery_prob < 0.0 || delivery_prob > 1.0) throw std::invalid_argument("delivery probability outside [0,1]");
  if (delay < 0.0) throw std::invalid_argument("link delay must be >= 0");
}

void LinkModel::set_probability(RobotId i, RobotId j, double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("delivery probability outside [0,1]");
  prob_[index(i, j)] = p;
  prob_[index(j, i)] = p;
}

std::size_t LinkModel::index(RobotId i, RobotId j) const {
  if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= robots_ || static_cast<std::size_t>(j) >= robots_)
    throw std::out_of_range("robot id outside link model");
  return static_cast<std::size_t>(i) * robots_ + static_cast<std::size_t>(j);
}

void InFlightQueue::push(double deliver_at, RobotId receiver, Message msg) {
  entries_.emplace(std::make_pair(deliver_at, seq_++), Delivery{deliver_at, receiver, std::move(msg)});
}

std::vector<Delivery> InFlightQueue::drain(double t) {
  std::vector<Delivery> out;
  auto it = entries_.begin();
  while (it != entries_.end() && it->first.first <= t + 1e-9) {
    out.push_back(std::move(it->second));
    it = entries_.erase(it);
  }
  return out;
}

std::size_t broadcast(const LinkModel& link, InFlightQueue& queue, const Message& msg, double t, Rng& rng) {
  std::size_t delivered = 0;
  for (std::size_t j = 0; j < link.robots(); ++j) {
    const auto r = static_cast<RobotId>(j);
    if (r == msg.sender) continue;
    if (rng.bernoulli(link.probability(msg.sender, r))) {
      queue.push(t + link.delay(), r, msg);
      ++delivered;
    }
  }
  return delivered;
}

}  // namespace patrol
