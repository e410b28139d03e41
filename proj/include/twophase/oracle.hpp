#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "twophase/diffusion.hpp"
#include "twophase/graph.hpp"

// Brute-force ground truth on small graphs. Every quantity here is computed by
// enumerating all 2^m live graphs, so it is exact up to double rounding
// (summation runs in descending-probability order; the error stays well below
// 1e-9 for the instance sizes the caps allow).
namespace twophase::oracle {

/// Node subset as a bitmask; requires n <= 64.
using NodeMask = std::uint64_t;

class CapExceeded : public Error {
 public:
  using Error::Error;
};

struct OracleLimits {
  std::size_t max_edges = 24;
  /// Upper bound on live-graph x candidate-set evaluations inside one exact_f call.
  double max_subset_work = 2e9;
};

struct LiveGraph {
  std::uint64_t edge_mask = 0;  // bit i set iff edge i (in InfluenceGraph::edges() order) is live
  double probability = 0.0;
};

NodeMask to_mask(std::span<const NodeId> nodes);
std::vector<NodeId> from_mask(NodeMask mask);

/// All 2^m live graphs in descending probability order.
std::vector<LiveGraph> enumerate_live_graphs(const InfluenceGraph& graph, const OracleLimits& limits = {});

/// Precomputed enumeration for repeated queries on one graph.
class ExactModel {
 public:
  explicit ExactModel(const InfluenceGraph& graph, OracleLimits limits = {});

  std::size_t num_nodes() const noexcept { return n_; }
  std::span<const LiveGraph> live_graphs() const noexcept { return live_; }

  /// sigma(S) = sum_X p(X) |reach_X(S)|.
  double sigma(NodeMask seeds) const;

  /// nu(S) = sum_X p(X) sum_{j reachable} Gamma(dist_X(S, j)).
  double nu(NodeMask seeds, const DecayFunction& decay) const;

  /// Two-phase objective: for each observation Y at step d, the best k2-set
  /// of inactive nodes is found by exhaustive search. With a decay function
  /// the value of node j is Gamma(activation time). `s2_witness`, when given,
  /// receives one (active-at-d mask, chosen second-phase set) pair per
  /// distinct observation; the set is the lexicographically smallest optimum.
  double f(NodeMask s1, std::int32_t d, std::size_t k2,
           const DecayFunction& decay = DecayFunction::constant_one(),
           std::vector<std::pair<NodeMask, NodeMask>>* s2_witness = nullptr) const;

  /// max over |S| = k of sigma(S). Ties resolve to the smallest mask in
  /// lexicographic subset order.
  double best_sigma(std::size_t k, NodeMask* argmax = nullptr) const;

  /// max over |S1| = k1 of f(S1, d, k2).
  double best_f(std::size_t k1, std::int32_t d, std::size_t k2,
                const DecayFunction& decay = DecayFunction::constant_one(),
                NodeMask* argmax = nullptr) const;

 private:
  const NodeMask* adjacency(std::size_t x) const { return &adjacency_[x * n_]; }

  std::size_t n_;
  OracleLimits limits_;
  std::vector<LiveGraph> live_;
  std::vector<NodeMask> adjacency_;  // live graph x, node v -> out-neighbour mask
};

double exact_sigma(const InfluenceGraph& graph, std::span<const NodeId> seeds);
double exact_f(const InfluenceGraph& graph, std::span<const NodeId> s1, std::int32_t d, std::size_t k2);
double exact_nu(const InfluenceGraph& graph, std::span<const NodeId> seeds, const DecayFunction& decay);

/// Calls fn(mask) for every k-subset of `universe` in lexicographic order of
/// node ids.
template <typename Fn>
void for_each_subset(NodeMask universe, std::size_t k, Fn&& fn);

}  // namespace twophase::oracle

#include "twophase/oracle_inl.hpp"
