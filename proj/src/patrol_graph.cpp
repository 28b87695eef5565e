#include "patrol/patrol_graph.hpp"

#include "patrol/errors.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <functional>
#include <limits>
#include <queue>
#include <sstream>

namespace patrol {

void PatrollingGraph::add_node(const Node& node) {
  if (contains(node.id)) throw std::invalid_argument("duplicate node id " + std::to_string(node.id));
  if (!(node.priority > 0.0)) throw std::invalid_argument("node priority must be > 0");
  if (!(node.visit_radius > 0.0)) throw std::invalid_argument("node visit radius must be > 0");
  index_[node.id] = nodes_.size();
  nodes_.push_back(node);
  adjacency_.emplace_back();
}

void PatrollingGraph::add_edge(NodeId i, NodeId j, double travel_cost) {
  if (i == j) throw std::invalid_argument("self loop on node " + std::to_string(i));
  if (!(travel_cost > 0.0)) throw std::invalid_argument("edge travel cost must be > 0");
  const std::size_t a = index_of(i), b = index_of(j);
  if (i > j) std::swap(i, j);
  for (const auto& [nb, e] : adjacency_[a]) {
    if (nb == b) {
      edges_[e].travel_cost = travel_cost;
      return;
    }
  }
  adjacency_[a].emplace_back(b, edges_.size());
  adjacency_[b].emplace_back(a, edges_.size());
  edges_.push_back(Edge{i, j, travel_cost});
}

std::size_t PatrollingGraph::index_of(NodeId id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw std::out_of_range("unknown node id " + std::to_string(id));
  return it->second;
}

std::vector<std::pair<NodeId, double>> PatrollingGraph::neighbors(NodeId id) const {
  std::vector<std::pair<NodeId, double>> out;
  for (const auto& [nb, e] : adjacency_[index_of(id)]) out.emplace_back(nodes_[nb].id, edges_[e].travel_cost);
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<double> PatrollingGraph::edge_cost(NodeId i, NodeId j) const {
  const std::size_t b = index_of(j);
  for (const auto& [nb, e] : adjacency_[index_of(i)])
    if (nb == b) return edges_[e].travel_cost;
  return std::nullopt;
}

std::vector<std::vector<NodeId>> PatrollingGraph::components() const {
  std::vector<int> comp(nodes_.size(), -1);
  std::vector<std::vector<NodeId>> out;
  for (std::size_t s = 0; s < nodes_.size(); ++s) {
    if (comp[s] >= 0) continue;
    const int c = static_cast<int>(out.size());
    out.emplace_back();
    std::deque<std::size_t> q{s};
    comp[s] = c;
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop_front();
      out.back().push_back(nodes_[u].id);
      for (const auto& [v, e] : adjacency_[u]) {
        if (comp[v] < 0) {
          comp[v] = c;
          q.push_back(v);
        }
      }
    }
    std::sort(out.back().begin(), out.back().end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void PatrollingGraph::require_connected() const {
  if (empty()) throw GraphDisconnectedError("patrolling graph is empty", {});
  auto comps = components();
  if (comps.size() == 1) return;
  std::ostringstream msg;
  msg << "patrolling graph has " << comps.size() << " connected components:";
  for (const auto& c : comps) {
    msg << " {";
    for (std::size_t k = 0; k < c.size(); ++k) msg << (k ? " " : "") << c[k];
    msg << "}";
  }
  throw GraphDisconnectedError(msg.str(), std::move(comps));
}

std::vector<double> PatrollingGraph::shortest_costs(NodeId from) const {
  std::vector<double> dist(nodes_.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  const std::size_t s = index_of(from);
  dist[s] = 0.0;
  pq.emplace(0.0, s);
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (const auto& [v, e] : adjacency_[u]) {
      const double nd = d + edges_[e].travel_cost;
      if (nd < dist[v]) {
        dist[v] = nd;
        pq.emplace(nd, v);
      }
    }
  }
  return dist;
}

NodeId PatrollingGraph::nearest_node(const Vec3& p) const {
  if (empty()) throw std::logic_error("nearest_node on empty graph");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const double d = (nodes_[k].position - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return nodes_[best].id;
}

std::vector<NodeId> PatrollingGraph::nodes_containing(const Vec3& p) const {
  std::vector<NodeId> out;
  for (const auto& n : nodes_)
    if ((n.position - p).norm() <= n.visit_radius + 1e-9) out.push_back(n.id);
  return out;
}

std::vector<NodeId> neighbors_at_depth(const PatrollingGraph& graph, NodeId id, int depth) {
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  if (!graph.contains(id)) throw std::out_of_range("unknown node id " + std::to_string(id));
  std::unordered_map<NodeId, int> seen{{id, 0}};
  std::deque<NodeId> q{id};
  std::vector<NodeId> out;
  while (!q.empty()) {
    const NodeId u = q.front();
    q.pop_front();
    const int du = seen[u];
    if (du == depth) continue;
    for (const auto& [v, _] : graph.neighbors(u)) {
      if (seen.count(v)) continue;
      seen[v] = du + 1;
      out.push_back(v);
      q.push_back(v);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

GraphFile parse_graph(std::istream& in) {
  GraphFile gf;
  struct PendingEdge {
    NodeId i, j;
    std::optional<double> cost;
    int line;
  };
  std::vector<PendingEdge> pending;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    auto fail = [&](const std::string& why) {
      throw InputError("graph line " + std::to_string(lineno) + ": " + why);
    };
    if (tag == "NODE") {
      Node n;
      double x, y, z;
      if (!(ss >> n.id >> x >> y >> z >> n.priority >> n.visit_radius)) fail("expected NODE <id> <x> <y> <z> <w> <Rv>");
      n.position = Vec3(x, y, z);
      try {
        gf.graph.add_node(n);
      } catch (const std::exception& e) {
        fail(e.what());
      }
    } else if (tag == "EDGE") {
      PendingEdge e{0, 0, std::nullopt, lineno};
      if (!(ss >> e.i >> e.j)) fail("expected EDGE <i> <j> [cost]");
      double c;
      if (ss >> c) e.cost = c;
      pending.push_back(e);
    } else {
      fail("unknown record '" + tag + "'");
    }
  }
  for (const auto& e : pending) {
    if (!gf.graph.contains(e.i) || !gf.graph.contains(e.j))
      throw InputError("graph line " + std::to_string(e.line) + ": edge references unknown node");
    double cost = e.cost.value_or(0.0);
    if (!e.cost) {
      cost = std::max(1e-6, distance(gf.graph.node(e.i).position, gf.graph.node(e.j).position));
      gf.missing_costs.emplace_back(e.i, e.j);
    }
    try {
      gf.graph.add_edge(e.i, e.j, cost);
    } catch (const std::exception& ex) {
      throw InputError("graph line " + std::to_string(e.line) + ": " + ex.what());
    }
  }
  return gf;
}

GraphFile read_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open graph file '" + path + "'");
  return parse_graph(in);
}

void write_graph(std::ostream& out, const PatrollingGraph& graph) {
  out << "# patrolling graph: " << graph.size() << " nodes, " << graph.edges().size() << " edges\n";
  out.precision(17);
  for (const auto& n : graph.nodes())
    out << "NODE " << n.id << ' ' << n.position.x() << ' ' << n.position.y() << ' ' << n.position.z() << ' '
        << n.priority << ' ' << n.visit_radius << '\n';
  for (const auto& e : graph.edges()) out << "EDGE " << e.i << ' ' << e.j << ' ' << e.travel_cost << '\n';
}

void write_graph_file(const std::string& path, const PatrollingGraph& graph) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write graph file '" + path + "'");
  write_graph(out, graph);
}

}  // namespace patrol
