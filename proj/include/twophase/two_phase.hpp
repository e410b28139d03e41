#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "twophase/cross_entropy.hpp"
#include "twophase/diffusion.hpp"
#include "twophase/graph.hpp"
#include "twophase/selectors.hpp"

namespace twophase {

enum class Algorithm { sd, wd, gdd, greedy, rmax, spic, face };

Algorithm parse_algorithm(std::string_view name);
std::string_view to_string(Algorithm a);
/// True for selectors that query an objective (greedy, rmax, spic, face).
bool uses_objective(Algorithm a);

/// Myopic phase-1 selection maximizes spread alone; farsighted maximizes the
/// two-phase value h with the second phase folded in.
enum class PhaseMode { myopic, farsighted };

PhaseMode parse_mode(std::string_view name);
std::string_view to_string(PhaseMode m);

struct SelectorOptions {
  /// Replicates behind each objective query inside greedy/RMax/SPIC/FACE.
  std::size_t objective_sims = 1000;
  /// 0 means 5n.
  std::size_t rmax_samples = 0;
  std::size_t spic_permutations = 0;
  /// FACE parameters; defaults_for(n) when unset.
  std::optional<CeConfig> face;
  std::uint64_t seed = 0x9d2c5680a4e1b7f3ULL;
};

/// Runs one of the single-phase selectors. Objective-driven selectors call
/// `objective`, which must already account for `preselected`; the heuristics
/// treat `preselected` as chosen.
SeedSet select_seeds(const InfluenceGraph& graph, Algorithm algorithm, std::size_t k,
                     const SetObjective& objective, const SelectorOptions& options,
                     std::span<const NodeId> preselected = {});

struct TwoPhasePlan {
  std::size_t k1 = 0;
  std::size_t k2 = 0;
  std::int32_t d = 0;
  PhaseMode mode = PhaseMode::myopic;
  Algorithm first = Algorithm::gdd;
  Algorithm second = Algorithm::gdd;

  void validate(std::size_t num_nodes) const;
};

struct TwoPhaseConfig {
  MonteCarloConfig mc;
  DecayFunction decay = DecayFunction::constant_one();
  SelectorOptions selector;
  /// Replicates per objective query when phase 1 is chosen farsightedly.
  std::size_t farsighted_phase1_sims = 50;
  std::size_t farsighted_phase2_sims = 50;
  /// Outer replicates whose second-phase seeds are kept in the result.
  std::size_t keep_s2_examples = 5;
};

struct SecondPhaseExample {
  std::size_t replicate = 0;
  std::size_t already = 0;
  std::vector<NodeId> recent;
  std::vector<NodeId> s2;
};

struct TwoPhaseResult {
  SpreadEstimate spread;
  std::vector<NodeId> s1;
  std::vector<SecondPhaseExample> realized_s2_examples;
  /// Expected newly active nodes per step (undiscounted).
  std::vector<double> progression;
  /// Standard error of each progression entry over outer replicates.
  std::vector<double> progression_stderr;
};

/// Nested Monte Carlo: `mc.phase1_sims` outer replicates run phase 1 from s1
/// up to step d; each observation picks k2 seeds on the residual graph with
/// the recently activated nodes preselected, then `mc.phase2_sims` inner
/// replicates finish the diffusion. A node activated t steps into the second
/// phase counts Gamma(d + t). The standard error is taken over the outer
/// replicate means.
TwoPhaseResult two_phase_spread(const InfluenceGraph& graph, std::span<const NodeId> s1, std::int32_t d,
                                std::size_t k2, const TwoPhaseConfig& config,
                                Algorithm second = Algorithm::gdd);

/// Two-phase value with a GDD second phase.
SpreadEstimate eval_h(const InfluenceGraph& graph, std::span<const NodeId> s1, std::int32_t d, std::size_t k2,
                      const TwoPhaseConfig& config);

/// Two-phase value with a greedy second phase on Monte-Carlo spread. Only
/// practical on small graphs.
SpreadEstimate eval_g(const InfluenceGraph& graph, std::span<const NodeId> s1, std::int32_t d, std::size_t k2,
                      const TwoPhaseConfig& config);

/// Chooses S1 with plan.first (against spread, or against h when farsighted),
/// then evaluates the plan. k2 = 0 with d = 0 is plain single-phase
/// selection scored by `mc.single_phase_sims` replicates.
TwoPhaseResult run_two_phase(const InfluenceGraph& graph, const TwoPhasePlan& plan, const TwoPhaseConfig& config);

/// Phase-1 seed choice of run_two_phase, exposed for schedule search.
SeedSet select_first_phase(const InfluenceGraph& graph, const TwoPhasePlan& plan, const TwoPhaseConfig& config);

namespace reference {

/// Single-threaded two_phase_spread with a GDD second phase, for checking
/// the parallel kernel bit-for-bit.
TwoPhaseResult two_phase_spread_serial(const InfluenceGraph& graph, std::span<const NodeId> s1, std::int32_t d,
                                       std::size_t k2, const TwoPhaseConfig& config);

}  // namespace reference

}  // namespace twophase
