#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "twophase/diffusion.hpp"
#include "twophase/graph.hpp"

namespace twophase {

/// Seeds in selection order.
struct SeedSet {
  std::vector<NodeId> nodes;
  std::size_t budget = 0;
  /// Objective value after each pick, for selectors that evaluate one.
  std::vector<double> values;
};

/// Set function to maximize. Implementations must be deterministic: the same
/// set always yields the same estimate (fixed random streams).
using SetObjective = std::function<SpreadEstimate(std::span<const NodeId>)>;

/// sigma(preselected + S) by Monte Carlo with a fixed master seed, so every
/// candidate in a greedy round sees the same replicate streams.
SetObjective sigma_objective(const InfluenceGraph& graph, std::size_t sims, std::uint64_t seed,
                             std::vector<NodeId> preselected = {});

/// Generalized degree discount state.
///   w_v = prod_{selected in-neighbours x} (1 - p_xv) * (1 + sum_{unselected out-neighbours y} p_vy)
class GddState {
 public:
  GddState(const InfluenceGraph& graph, std::span<const NodeId> preselected = {});

  double score(NodeId v) const noexcept { return survival_[v] * (1.0 + out_sum_[v]); }
  bool selected(NodeId v) const noexcept { return selected_[v]; }
  /// Highest-scoring unselected node, lowest id on ties; kNoNode when none remain.
  NodeId best() const noexcept;
  void select(NodeId u);

  /// Edge reads performed so far (initialization plus discount updates).
  std::uint64_t edge_touches() const noexcept { return edge_touches_; }

 private:
  const InfluenceGraph* graph_;
  std::vector<double> survival_;
  std::vector<double> out_sum_;
  std::vector<bool> selected_;
  std::uint64_t edge_touches_ = 0;
};

struct GddStats {
  std::uint64_t edge_touches = 0;
};

// Budget errors: every selector throws std::invalid_argument when k exceeds
// the number of nodes it may pick from.

/// Single discount: repeatedly take the node with most outgoing edges in the
/// remaining graph, then delete it with its incident edges.
SeedSet select_sd(const InfluenceGraph& graph, std::size_t k, std::span<const NodeId> preselected = {});

/// Weighted discount: as select_sd, scoring by summed outgoing probability.
SeedSet select_wd(const InfluenceGraph& graph, std::size_t k, std::span<const NodeId> preselected = {});

SeedSet select_gdd(const InfluenceGraph& graph, std::size_t k, std::span<const NodeId> preselected = {},
                   GddStats* stats = nullptr);

/// Greedy hill-climbing without lazy evaluation. `excluded` nodes are never
/// candidates (e.g. nodes already acting as seeds inside the objective).
SeedSet select_greedy(const InfluenceGraph& graph, std::size_t k, const SetObjective& objective,
                      std::span<const NodeId> excluded = {});

/// Best of `samples` uniformly random k-subsets.
SeedSet select_rmax(const InfluenceGraph& graph, std::size_t k, const SetObjective& objective,
                    std::size_t samples, std::uint64_t seed, std::span<const NodeId> excluded = {});

/// Shapley values by random-permutation sampling.
std::vector<double> approximate_shapley(const InfluenceGraph& graph, const SetObjective& objective,
                                        std::size_t permutations, std::uint64_t seed,
                                        std::span<const NodeId> excluded = {});

/// Shapley-value ranking with IC discounting: picking y scales each
/// out-neighbour x by (1 - p_yx) and subtracts p_zy * value(y) from each
/// in-neighbour z (clamped at zero).
SeedSet select_spic(const InfluenceGraph& graph, std::size_t k, const SetObjective& objective,
                    std::size_t permutations, std::uint64_t seed, std::span<const NodeId> excluded = {},
                    std::vector<double>* shapley_out = nullptr);

/// Post-processing half of SPIC on precomputed values.
SeedSet spic_from_values(const InfluenceGraph& graph, std::size_t k, std::vector<double> values,
                         std::span<const NodeId> excluded = {});

}  // namespace twophase
