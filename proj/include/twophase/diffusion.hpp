#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "twophase/graph.hpp"
#include "twophase/rng.hpp"

namespace twophase {

/// Activation time of a node that was never reached.
inline constexpr std::int32_t kNever = -1;

struct DiffusionTrace {
  /// Step at which each node became active, or kNever.
  std::vector<std::int32_t> activation_time;
  std::size_t final_active_count = 0;

  /// Number of nodes activated at each step 0..last.
  std::vector<std::size_t> new_per_step() const;
};

/// What a campaign can see at step d: nodes activated before d and exactly at d.
struct Observation {
  std::int32_t at_step = 0;
  std::vector<NodeId> already;
  std::vector<NodeId> recent;
};

/// Monte-Carlo estimate of an expected value.
struct SpreadEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 1;
};

/// Time-value weighting of activations: Gamma(t) = 1 or Gamma(t) = delta^t.
class DecayFunction {
 public:
  static DecayFunction constant_one() { return DecayFunction(1.0, true); }
  static DecayFunction exponential(double delta);

  double operator()(std::int32_t t) const noexcept {
    if (constant_) return 1.0;
    return std::pow(delta_, static_cast<double>(t));
  }
  bool is_constant_one() const noexcept { return constant_ || delta_ == 1.0; }
  double delta() const noexcept { return delta_; }

 private:
  DecayFunction(double delta, bool constant) : delta_(delta), constant_(constant) {}
  double delta_;
  bool constant_;
};

struct MonteCarloConfig {
  std::size_t single_phase_sims = 10000;
  std::size_t phase1_sims = 1000;
  std::size_t phase2_sims = 1000;
  std::uint64_t master_seed = 0x2f6b3c1d5a4e9870ULL;

  void validate() const;
};

/// Reusable single-cascade workspace. Resets only the nodes it touched, so a
/// cascade costs O(active frontier) rather than O(n).
class CascadeRunner {
 public:
  explicit CascadeRunner(const InfluenceGraph& graph);

  /// Runs independent-cascade diffusion from `seeds`. Nodes activated at step
  /// `stop_at` are recorded but do not attempt their neighbours. Returns the
  /// number of active nodes.
  std::size_t run(std::span<const NodeId> seeds, SplitMix64& rng, std::int32_t stop_at);

  std::int32_t time_of(NodeId v) const noexcept { return time_[v]; }
  /// Active nodes in activation order.
  std::span<const NodeId> activated() const noexcept { return activated_; }
  /// Newly activated count per step, indexed from 0.
  std::span<const std::size_t> new_per_step() const noexcept { return per_step_; }

 private:
  const InfluenceGraph* graph_;
  std::vector<std::int32_t> time_;
  std::vector<NodeId> activated_;
  std::vector<NodeId> frontier_;
  std::vector<NodeId> next_;
  std::vector<std::size_t> per_step_;
};

/// Discrete-step IC diffusion. stop_at defaults to n.
DiffusionTrace simulate_ic(const InfluenceGraph& graph, std::span<const NodeId> seeds,
                           SplitMix64& rng, std::optional<std::int32_t> stop_at = std::nullopt);

/// Observation at step d of a trace that was run to at least step d.
Observation observe_at(const DiffusionTrace& trace, std::int32_t d);

/// G with `already` and all incident edges removed, re-indexed densely
/// (relative order of surviving ids is preserved).
struct ResidualGraph {
  InfluenceGraph graph;
  std::vector<NodeId> to_parent;
  std::vector<NodeId> from_parent;  // kNoNode for removed nodes

  std::vector<NodeId> to_residual(std::span<const NodeId> parent_ids) const;
  std::vector<NodeId> to_parent_ids(std::span<const NodeId> residual_ids) const;
};

ResidualGraph residual_graph(const InfluenceGraph& graph, std::span<const NodeId> already);

/// Mean final active count over `sims` replicates; replicate i draws from
/// stream (master_seed, single_phase, i). Replicates run in parallel and
/// are reduced in index order, so the result is independent of thread count.
SpreadEstimate estimate_spread(const InfluenceGraph& graph, std::span<const NodeId> seeds,
                               const MonteCarloConfig& config, std::size_t sims);

/// Same replicates as estimate_spread, each scored as sum_j Gamma(t_j).
SpreadEstimate estimate_temporal_spread(const InfluenceGraph& graph, std::span<const NodeId> seeds,
                                        const DecayFunction& decay, const MonteCarloConfig& config,
                                        std::size_t sims);

/// Mean and standard error of a sample.
SpreadEstimate summarize(std::span<const double> values);

namespace reference {

// Straightforward single-threaded implementations kept as test oracles for
// the parallel kernels. They consume the same random streams in the same
// order, so results must match bit-for-bit.
DiffusionTrace simulate_ic_serial(const InfluenceGraph& graph, std::span<const NodeId> seeds,
                                  SplitMix64& rng, std::optional<std::int32_t> stop_at = std::nullopt);

SpreadEstimate estimate_spread_serial(const InfluenceGraph& graph, std::span<const NodeId> seeds,
                                      const MonteCarloConfig& config, std::size_t sims);

SpreadEstimate estimate_temporal_spread_serial(const InfluenceGraph& graph,
                                               std::span<const NodeId> seeds,
                                               const DecayFunction& decay,
                                               const MonteCarloConfig& config, std::size_t sims);

}  // namespace reference

}  // namespace twophase
