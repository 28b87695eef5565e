#pragma once

#include "patrol/geometry.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace patrol {

using NodeId = int;
using RobotId = int;

struct Node {
  NodeId id = 0;
  Vec3 position = Vec3::Zero();
  double priority = 1.0;      // w(n), dilates idleness
  double visit_radius = 0.5;  // R_v, m
};

/// Undirected edge, stored once with i < j.
struct Edge {
  NodeId i = 0;
  NodeId j = 0;
  double travel_cost = 0.0;  // m
};

/// Topological map of the patrolled environment. Node order is insertion order
/// and defines the layout of idleness vectors.
class PatrollingGraph {
 public:
  void add_node(const Node& node);
  /// Adds or updates the undirected edge {i, j}.
  void add_edge(NodeId i, NodeId j, double travel_cost);

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }

  bool contains(NodeId id) const { return index_.count(id) != 0; }
  std::size_t index_of(NodeId id) const;
  const Node& node(NodeId id) const { return nodes_[index_of(id)]; }

  /// Neighbours of a node with the connecting edge cost, ordered by node id.
  std::vector<std::pair<NodeId, double>> neighbors(NodeId id) const;
  std::optional<double> edge_cost(NodeId i, NodeId j) const;

  /// Connected components as sorted id lists, ordered by their smallest id.
  std::vector<std::vector<NodeId>> components() const;
  bool is_connected() const { return !empty() && components().size() == 1; }
  /// Throws GraphDisconnectedError when empty or disconnected.
  void require_connected() const;

  /// Single-source shortest travel costs over edge costs (infinity if unreachable).
  std::vector<double> shortest_costs(NodeId from) const;

  NodeId nearest_node(const Vec3& p) const;
  /// Nodes whose visit ball contains p.
  std::vector<NodeId> nodes_containing(const Vec3& p) const;

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::unordered_map<NodeId, std::size_t> index_;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adjacency_;  // (node idx, edge idx)
};

/// Nodes reachable within `depth` hops of `id`, excluding `id`, sorted.
std::vector<NodeId> neighbors_at_depth(const PatrollingGraph& graph, NodeId id, int depth);

/// Graph text format: `NODE <id> <x> <y> <z> <w> <Rv>` and `EDGE <i> <j> [cost]`.
/// Edges without a cost are returned in `missing_costs` and get a provisional
/// Euclidean cost until the caller recomputes them.
struct GraphFile {
  PatrollingGraph graph;
  std::vector<std::pair<NodeId, NodeId>> missing_costs;
};
GraphFile parse_graph(std::istream& in);
GraphFile read_graph_file(const std::string& path);
void write_graph(std::ostream& out, const PatrollingGraph& graph);
void write_graph_file(const std::string& path, const PatrollingGraph& graph);

}  // namespace patrol
