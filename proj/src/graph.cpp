#include "twophase/graph.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>
#include <utility>

#include "twophase/rng.hpp"

namespace twophase {

ParseError::ParseError(const std::string& what, std::size_t line)
    : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

InfluenceGraph InfluenceGraph::from_edges(std::size_t num_nodes, std::vector<Edge> edges,
                                          std::vector<std::string> labels) {
  if (num_nodes >= kNoNode) throw GraphError("too many nodes");
  if (labels.empty()) {
    labels.reserve(num_nodes);
    for (std::size_t i = 0; i < num_nodes; ++i) labels.push_back(std::to_string(i));
  }
  if (labels.size() != num_nodes) throw GraphError("label count does not match node count");

  for (const Edge& e : edges) {
    if (e.source >= num_nodes || e.target >= num_nodes) throw GraphError("edge endpoint out of range");
    if (e.source == e.target) throw GraphError("self-loop on node " + labels[e.source]);
    if (!(e.prob >= 0.0 && e.prob <= 1.0)) {
      throw GraphError("probability outside [0,1] on edge " + labels[e.source] + "->" +
                       labels[e.target]);
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::pair(a.source, a.target) < std::pair(b.source, b.target);
  });
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (edges[i].source == edges[i - 1].source && edges[i].target == edges[i - 1].target) {
      throw GraphError("duplicate edge " + labels[edges[i].source] + "->" + labels[edges[i].target]);
    }
  }

  InfluenceGraph g;
  g.labels_ = std::move(labels);
  g.out_offsets_.assign(num_nodes + 1, 0);
  g.in_offsets_.assign(num_nodes + 1, 0);
  for (const Edge& e : edges) {
    ++g.out_offsets_[e.source + 1];
    ++g.in_offsets_[e.target + 1];
  }
  for (std::size_t i = 0; i < num_nodes; ++i) {
    g.out_offsets_[i + 1] += g.out_offsets_[i];
    g.in_offsets_[i + 1] += g.in_offsets_[i];
  }
  g.out_arcs_.resize(edges.size());
  g.in_arcs_.resize(edges.size());
  std::vector<std::size_t> out_fill(g.out_offsets_.begin(), g.out_offsets_.end() - 1);
  std::vector<std::size_t> in_fill(g.in_offsets_.begin(), g.in_offsets_.end() - 1);
  // Edges are sorted by (source, target), so in-lists come out sorted by source.
  for (const Edge& e : edges) {
    g.out_arcs_[out_fill[e.source]++] = Arc{e.target, e.prob};
    g.in_arcs_[in_fill[e.target]++] = Arc{e.source, e.prob};
  }
  return g;
}

std::size_t InfluenceGraph::max_degree() const noexcept {
  std::size_t best = 0;
  for (NodeId v = 0; v < num_nodes(); ++v) best = std::max(best, in_degree(v) + out_degree(v));
  return best;
}

std::size_t InfluenceGraph::max_out_degree() const noexcept {
  std::size_t best = 0;
  for (NodeId v = 0; v < num_nodes(); ++v) best = std::max(best, out_degree(v));
  return best;
}

std::optional<NodeId> InfluenceGraph::find(std::string_view label) const {
  for (NodeId v = 0; v < num_nodes(); ++v) {
    if (labels_[v] == label) return v;
  }
  return std::nullopt;
}

std::vector<Edge> InfluenceGraph::edges() const {
  std::vector<Edge> result;
  result.reserve(num_edges());
  for (NodeId u = 0; u < num_nodes(); ++u) {
    for (const Arc& a : out_arcs(u)) result.push_back({u, a.node, a.prob});
  }
  return result;
}

bool operator==(const InfluenceGraph& a, const InfluenceGraph& b) {
  return a.labels_ == b.labels_ && a.edges() == b.edges();
}

namespace {

class LabelTable {
 public:
  NodeId intern(const std::string& label) {
    auto [it, inserted] = ids_.try_emplace(label, static_cast<NodeId>(labels_.size()));
    if (inserted) labels_.push_back(label);
    return it->second;
  }
  std::size_t size() const { return labels_.size(); }
  std::vector<std::string> take() { return std::move(labels_); }

 private:
  std::unordered_map<std::string, NodeId> ids_;
  std::vector<std::string> labels_;
};

struct UndirectedEdges {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  std::vector<std::string> labels;
};

// Collapses an undirected edge list to unique unordered pairs, dropping
// self-loops. Files that list both orientations of an edge are accepted.
UndirectedEdges collect_undirected(const RawEdgeList& raw) {
  if (raw.has_probabilities()) {
    throw GraphError("undirected transform requires an unweighted edge list");
  }
  LabelTable table;
  UndirectedEdges out;
  std::map<std::pair<NodeId, NodeId>, bool> seen;
  for (const RawRecord& r : raw.pairs) {
    NodeId u = table.intern(r.source);
    NodeId v = table.intern(r.target);
    if (u == v) continue;
    auto key = std::minmax(u, v);
    if (seen.emplace(std::pair(key.first, key.second), true).second) out.pairs.emplace_back(u, v);
  }
  out.labels = table.take();
  return out;
}

}  // namespace

InfluenceGraph build_graph(const RawEdgeList& raw, BuildReport* report) {
  LabelTable table;
  std::vector<Edge> edges;
  std::size_t self_loops = 0;
  const bool weighted = raw.has_probabilities();
  for (const RawRecord& r : raw.pairs) {
    if (r.prob.has_value() != weighted) throw GraphError("mixed weighted and unweighted records");
    double p = weighted ? *r.prob : 1.0;
    if (!(p >= 0.0 && p <= 1.0)) {
      throw GraphError("probability outside [0,1] on edge " + r.source + "->" + r.target);
    }
    NodeId u = table.intern(r.source);
    NodeId v = table.intern(r.target);
    if (u == v) {
      ++self_loops;
      continue;
    }
    edges.push_back({u, v, p});
    if (!raw.directed) edges.push_back({v, u, p});
  }
  if (report != nullptr) report->self_loops_dropped = self_loops;
  std::size_t n = table.size();
  return InfluenceGraph::from_edges(n, std::move(edges), table.take());
}

InfluenceGraph apply_wc_transform(const RawEdgeList& raw) {
  UndirectedEdges und = collect_undirected(raw);
  std::vector<std::size_t> degree(und.labels.size(), 0);
  for (auto [u, v] : und.pairs) {
    ++degree[u];
    ++degree[v];
  }
  std::vector<Edge> edges;
  edges.reserve(2 * und.pairs.size());
  for (auto [u, v] : und.pairs) {
    edges.push_back({u, v, 1.0 / static_cast<double>(degree[v])});
    edges.push_back({v, u, 1.0 / static_cast<double>(degree[u])});
  }
  std::size_t n = und.labels.size();
  return InfluenceGraph::from_edges(n, std::move(edges), std::move(und.labels));
}

InfluenceGraph apply_tv_transform(const RawEdgeList& raw, std::uint64_t seed) {
  UndirectedEdges und = collect_undirected(raw);
  SplitMix64 rng = make_stream(seed, StreamTag::trivalency, 0);
  std::vector<Edge> edges;
  edges.reserve(2 * und.pairs.size());
  for (auto [u, v] : und.pairs) {
    edges.push_back({u, v, kTrivalencyValues[rng() % 3]});
    edges.push_back({v, u, kTrivalencyValues[rng() % 3]});
  }
  std::size_t n = und.labels.size();
  return InfluenceGraph::from_edges(n, std::move(edges), std::move(und.labels));
}

InfluenceGraph example1_graph() {
  return InfluenceGraph::from_edges(4, {{0, 1, 0.5}, {1, 2, 0.8}, {1, 3, 0.9}}, {"A", "B", "C", "D"});
}

std::vector<NodeId> resolve_labels(const InfluenceGraph& graph, std::span<const std::string> labels) {
  std::vector<NodeId> ids;
  ids.reserve(labels.size());
  for (const std::string& l : labels) {
    auto id = graph.find(l);
    if (!id) throw GraphError("unknown node label '" + l + "'");
    ids.push_back(*id);
  }
  return ids;
}

}  // namespace twophase
