#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace twophase {

/// Dense node index. After loading, ids are contiguous in [0, n).
using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

/// Base class for every error raised by the library on bad input data.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed edge-list input. Carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Structurally invalid graph (duplicate edge, probability out of range, ...).
class GraphError : public Error {
 public:
  using Error::Error;
};

struct Edge {
  NodeId source = 0;
  NodeId target = 0;
  double prob = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// One adjacency entry: the neighbour on the other end and the edge probability.
struct Arc {
  NodeId node = 0;
  double prob = 0.0;
};

struct RawRecord {
  std::string source;
  std::string target;
  std::optional<double> prob;
};

/// Edge-list records as read from disk, before any id assignment.
struct RawEdgeList {
  bool directed = true;
  std::vector<RawRecord> pairs;

  bool has_probabilities() const noexcept {
    return !pairs.empty() && pairs.front().prob.has_value();
  }
};

/// Directed graph with per-edge influence probabilities, stored as two CSR
/// arrays (outgoing and incoming). Immutable after construction.
class InfluenceGraph {
 public:
  InfluenceGraph() = default;

  /// Validates and builds. Throws GraphError on self-loops, duplicate
  /// (u,v) pairs, out-of-range ids or probabilities outside [0,1].
  static InfluenceGraph from_edges(std::size_t num_nodes, std::vector<Edge> edges,
                                   std::vector<std::string> labels = {});

  std::size_t num_nodes() const noexcept { return labels_.size(); }
  std::size_t num_edges() const noexcept { return out_arcs_.size(); }

  std::span<const Arc> out_arcs(NodeId u) const noexcept {
    return {out_arcs_.data() + out_offsets_[u], out_arcs_.data() + out_offsets_[u + 1]};
  }
  std::span<const Arc> in_arcs(NodeId v) const noexcept {
    return {in_arcs_.data() + in_offsets_[v], in_arcs_.data() + in_offsets_[v + 1]};
  }
  std::size_t out_degree(NodeId u) const noexcept { return out_offsets_[u + 1] - out_offsets_[u]; }
  std::size_t in_degree(NodeId v) const noexcept { return in_offsets_[v + 1] - in_offsets_[v]; }

  /// Largest in-degree + out-degree over all nodes.
  std::size_t max_degree() const noexcept;
  std::size_t max_out_degree() const noexcept;

  const std::string& label(NodeId v) const { return labels_.at(v); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::optional<NodeId> find(std::string_view label) const;

  /// All edges ordered by (source, target).
  std::vector<Edge> edges() const;

  friend bool operator==(const InfluenceGraph& a, const InfluenceGraph& b);

 private:
  std::vector<std::size_t> out_offsets_{0};
  std::vector<Arc> out_arcs_;
  std::vector<std::size_t> in_offsets_{0};
  std::vector<Arc> in_arcs_;
  std::vector<std::string> labels_;
};

struct BuildReport {
  std::size_t self_loops_dropped = 0;
};

RawEdgeList parse_edge_list(std::istream& in, bool directed = true);
RawEdgeList load_edge_list(const std::filesystem::path& path, bool directed = true);

/// Assigns dense ids in first-appearance order. Self-loops are dropped and
/// counted; duplicate directed edges are an error.
InfluenceGraph build_graph(const RawEdgeList& raw, BuildReport* report = nullptr);

/// Weighted cascade: each undirected edge {u,v} becomes u->v with 1/deg(v)
/// and v->u with 1/deg(u).
InfluenceGraph apply_wc_transform(const RawEdgeList& raw);

/// Trivalency: each undirected edge becomes two directed edges, each with a
/// probability drawn uniformly from {0.001, 0.01, 0.1}.
InfluenceGraph apply_tv_transform(const RawEdgeList& raw, std::uint64_t seed);

inline constexpr double kTrivalencyValues[3] = {0.001, 0.01, 0.1};

// Native binary format: magic, version, node labels, (u, v, p) triples.
inline constexpr std::uint32_t kNativeFormatVersion = 1;
void save_native(const InfluenceGraph& graph, std::ostream& out);
void save_native(const InfluenceGraph& graph, const std::filesystem::path& path);
InfluenceGraph load_native(std::istream& in);
InfluenceGraph load_native(const std::filesystem::path& path);
bool is_native_file(const std::filesystem::path& path);

/// Writes "label label prob" lines with round-trip precision.
void save_edge_list(const InfluenceGraph& graph, std::ostream& out);

/// The four-node instance used throughout the worked examples:
/// A->B 0.5, B->C 0.8, B->D 0.9 (ids A=0, B=1, C=2, D=3).
InfluenceGraph example1_graph();

/// Maps labels to ids; throws GraphError for unknown labels.
std::vector<NodeId> resolve_labels(const InfluenceGraph& graph,
                                   std::span<const std::string> labels);

}  // namespace twophase
