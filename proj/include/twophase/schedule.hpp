#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "twophase/diffusion.hpp"
#include "twophase/oracle.hpp"
#include "twophase/two_phase.hpp"

// Choosing the budget split k1 : k2 and the delay d.
namespace twophase {

/// Value of the plan (k1, k - k1, d). Must be deterministic.
using PlanEvaluator = std::function<SpreadEstimate(std::size_t k1, std::int32_t d)>;

struct SearchConfig {
  std::size_t k_total = 0;
  std::int32_t d_max = 0;
  DecayFunction decay = DecayFunction::constant_one();
  /// 0 means max(1, k/20).
  std::size_t k1_grid_step = 0;
  /// Sequential delay search stops after this many non-improving steps.
  std::size_t patience = 2;
  std::size_t max_evaluations = 100000;

  /// 0, step, 2*step, ..., always ending with k.
  std::vector<std::size_t> k1_values() const;
  void validate() const;
};

struct GridEntry {
  std::size_t k1 = 0;
  std::int32_t d = 0;
  SpreadEstimate value;
};

struct GridResult {
  std::vector<GridEntry> entries;
  std::size_t best_k1 = 0;
  std::int32_t best_d = 0;
  SpreadEstimate best_value;
};

/// Picks the winner among entries. Values within one pooled standard error
/// of the maximum count as tied; ties go to the smaller k1, then the smaller
/// d, except without decay where the larger d wins (spread never falls with d).
GridEntry pick_best(const std::vector<GridEntry>& entries, const DecayFunction& decay);

/// Every (k1, d) on the grid; k1 = k only with d = 0.
GridResult exhaustive_grid(const SearchConfig& config, const PlanEvaluator& evaluate);

struct DelaySearchResult {
  std::int32_t d = 0;
  SpreadEstimate value;
  std::vector<GridEntry> probes;
};

/// d = 0, 1, 2, ... until `patience` steps in a row fail to improve. Without
/// decay the value is maximal at D, so only d = D is probed.
DelaySearchResult sequential_d_search(std::size_t k1, const SearchConfig& config, const PlanEvaluator& evaluate);

struct ScheduleResult {
  std::size_t k1 = 0;
  std::int32_t d = 0;
  SpreadEstimate value;
  std::vector<GridEntry> probes;
};

/// Integer golden-section search over the k1 grid, each probe's value being
/// the best delay from sequential_d_search. Probes are memoized.
ScheduleResult golden_section_k1(const SearchConfig& config, const PlanEvaluator& evaluate);

/// Practical horizon: the latest activation step seen from a WD seed set of
/// size k over `mc.phase1_sims` probe replicates (capped at n), plus `margin`.
std::int32_t estimate_D(const InfluenceGraph& graph, std::size_t k, const MonteCarloConfig& mc,
                        std::int32_t margin = 2);

/// Evaluates plans with run_two_phase; `shape` supplies mode and selectors.
PlanEvaluator pipeline_evaluator(const InfluenceGraph& graph, std::size_t k, TwoPhasePlan shape,
                                 TwoPhaseConfig config);

/// Exact plan value: max over |S1| = k1 of f(S1, d, k - k1).
PlanEvaluator oracle_evaluator(const oracle::ExactModel& model, std::size_t k, DecayFunction decay);

}  // namespace twophase
