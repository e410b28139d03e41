#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "twophase/graph.hpp"
#include "twophase/selectors.hpp"

// Fully adaptive cross-entropy search over fixed-size seed sets, and a joint
// variant that also samples the budget split and the delay.
namespace twophase {

/// How a Bernoulli draw of the wrong size is fixed up. `greedy` adds the most
/// likely missing nodes (or drops the least likely members); `weighted` picks
/// them at random in proportion to q (or 1 - q).
enum class CeRepair { greedy, weighted };

struct CeConfig {
  std::size_t n_min = 0;
  std::size_t n_max = 0;
  std::size_t n_elite = 0;
  double alpha = 0.6;
  std::size_t max_iterations = 20;
  /// Stop when the elite threshold moves by less than this, relatively,
  /// between consecutive iterations.
  double reliability_tol = 1e-3;
  /// Consecutive non-moving comparisons needed before stopping.
  std::size_t reliability_window = 2;
  /// Rank distinct sets only, so one lucky set cannot fill every elite slot.
  bool distinct_elites = true;
  CeRepair repair = CeRepair::weighted;
  /// Or when every probability is this close to 0 or 1.
  double degenerate_tol = 0.01;
  std::uint64_t seed = 0x5eed'cafe'f00dULL;

  /// n_min = n, n_max = 20n, n_elite = ceil(n/4).
  static CeConfig defaults_for(std::size_t n);
  void validate() const;
};

struct CeDistribution {
  std::vector<double> node_probs;
  /// Joint mode: k1_probs[j] is the probability of k1 = j (index 0 unused).
  std::vector<double> k1_probs;
  /// Joint mode: d_probs[d] for d in 0..D. d = 0 always means k1 = k.
  std::vector<double> d_probs;
};

struct CeIterationLog {
  std::size_t iteration = 0;
  std::size_t draws = 0;
  double elite_threshold = 0.0;
  double best = 0.0;
};

struct FaceResult {
  SeedSet seeds;
  double value = 0.0;
  CeDistribution distribution;
  std::vector<CeIterationLog> log;
  std::size_t evaluations = 0;  // distinct sets evaluated
};

/// q_i = k1 * w_i / sum(w) with w from GDD scores, clamped to 1 with the
/// surplus redistributed until no entry exceeds 1.
CeDistribution init_weighted(const InfluenceGraph& graph, std::size_t k1);
CeDistribution init_weighted_from(std::span<const double> weights, std::size_t k1);

/// Maximizes `objective` over sets of exactly `gamma` nodes drawn from the
/// non-excluded ones. Starts from uniform probabilities unless `init` is given.
FaceResult face_select(const InfluenceGraph& graph, std::size_t gamma, const SetObjective& objective,
                       const CeConfig& config, const CeDistribution* init = nullptr,
                       std::span<const NodeId> excluded = {});

/// Value of a complete two-phase plan: first-phase seeds s1 (|s1| = k1)
/// observed at delay d.
using PlanObjective = std::function<SpreadEstimate(std::size_t k1, std::int32_t d, std::span<const NodeId> s1)>;

struct JointResult {
  std::size_t k1 = 0;
  std::int32_t d = 0;
  SeedSet seeds;
  double value = 0.0;
  CeDistribution distribution;
  std::vector<CeIterationLog> log;
  std::size_t evaluations = 0;
};

JointResult face_joint_optimize(const InfluenceGraph& graph, std::size_t k, std::int32_t max_delay,
                                const PlanObjective& objective, const CeConfig& config);

}  // namespace twophase
