#pragma once

#include "patrol/patrol_graph.hpp"

#include <span>
#include <vector>

namespace patrol {

struct NodeIdlenessRecord {
  NodeId node_id = 0;
  double last_visit_time = 0.0;  // s
  double priority = 1.0;
};

/// w * (t - t_l). Throws std::invalid_argument when t precedes the last visit.
double instantaneous_idleness(const NodeIdlenessRecord& record, double t);

/// Mean of the per-node average idlenesses; size must equal the node count.
double graph_average_idleness(const PatrollingGraph& graph, std::span<const double> per_node_averages);

struct IdlenessSample {
  double t = 0.0;
  double value = 0.0;
};

struct WindowStats {
  double avg = 0.0;
  double std = 0.0;
  double max = 0.0;
};

/// Statistics of a uniformly sampled idleness signal restricted to
/// [t_end - window, t_end]. The integrals become left Riemann sums, so with a
/// constant period they reduce to the sample mean and population deviation.
WindowStats window_idleness_stats(std::span<const IdlenessSample> samples, double t_end, double window);

/// Pooled statistics over several nodes' windows: mean of per-node means, the
/// deviation of all pooled samples around it, and the overall maximum.
WindowStats pooled_window_stats(const std::vector<std::vector<double>>& per_node_values);

}  // namespace patrol
