#include "patrol/idleness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace patrol {

double instantaneous_idleness(const NodeIdlenessRecord& record, double t) {
  if (t < record.last_visit_time)
    throw std::invalid_argument("idleness queried at t=" + std::to_string(t) + " before last visit at " +
                                std::to_string(record.last_visit_time));
  return record.priority * (t - record.last_visit_time);
}

double graph_average_idleness(const PatrollingGraph& graph, std::span<const double> per_node_averages) {
  if (per_node_averages.size() != graph.size())
    throw std::invalid_argument("expected " + std::to_string(graph.size()) + " per-node averages, got " +
                                std::to_string(per_node_averages.size()));
  if (per_node_averages.empty()) throw std::invalid_argument("graph has no nodes");
  double sum = 0.0;
  for (double v : per_node_averages) sum += v;
  return sum / static_cast<double>(per_node_averages.size());
}

WindowStats window_idleness_stats(std::span<const IdlenessSample> samples, double t_end, double window) {
  const double t_begin = t_end - window;
  std::vector<double> values;
  for (const auto& s : samples)
    if (s.t >= t_begin && s.t <= t_end) values.push_back(s.value);
  if (values.empty()) throw std::invalid_argument("no idleness samples inside the window");
  return pooled_window_stats({values});
}

WindowStats pooled_window_stats(const std::vector<std::vector<double>>& per_node_values) {
  WindowStats out;
  double mean_sum = 0.0;
  std::size_t nodes = 0, count = 0;
  for (const auto& v : per_node_values) {
    if (v.empty()) continue;
    double s = 0.0;
    for (double x : v) {
      s += x;
      out.max = std::max(out.max, x);
    }
    mean_sum += s / static_cast<double>(v.size());
    ++nodes;
    count += v.size();
  }
  if (nodes == 0) throw std::invalid_argument("no idleness samples inside the window");
  out.avg = mean_sum / static_cast<double>(nodes);
  double sq = 0.0;
  for (const auto& v : per_node_values)
    for (double x : v) sq += (x - out.avg) * (x - out.avg);
  out.std = std::sqrt(sq / static_cast<double>(count));
  return out;
}

}  // namespace patrol
