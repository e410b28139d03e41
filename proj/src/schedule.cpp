#include "twophase/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace twophase {

std::vector<std::size_t> SearchConfig::k1_values() const {
  const std::size_t step = k1_grid_step != 0 ? k1_grid_step : std::max<std::size_t>(1, k_total / 20);
  std::vector<std::size_t> values;
  for (std::size_t k1 = 0; k1 < k_total; k1 += step) values.push_back(k1);
  values.push_back(k_total);
  return values;
}

void SearchConfig::validate() const {
  if (d_max < 0) throw std::invalid_argument("maximum delay must be non-negative");
  if (patience == 0) throw std::invalid_argument("patience must be at least 1");
}

GridEntry pick_best(const std::vector<GridEntry>& entries, const DecayFunction& decay) {
  if (entries.empty()) throw std::invalid_argument("no entries to choose from");
  const GridEntry* top = &entries.front();
  for (const GridEntry& e : entries) {
    if (e.value.mean > top->value.mean) top = &e;
  }
  const bool prefer_late = decay.is_constant_one();
  const GridEntry* best = nullptr;
  for (const GridEntry& e : entries) {
    double pooled = std::sqrt(e.value.std_error * e.value.std_error + top->value.std_error * top->value.std_error);
    double tol = std::max(pooled, 1e-9 * std::max(1.0, std::abs(top->value.mean)));
    if (e.value.mean < top->value.mean - tol) continue;
    if (best == nullptr || e.k1 < best->k1 ||
        (e.k1 == best->k1 && (prefer_late ? e.d > best->d : e.d < best->d))) {
      best = &e;
    }
  }
  return *best;
}

GridResult exhaustive_grid(const SearchConfig& config, const PlanEvaluator& evaluate) {
  config.validate();
  const std::vector<std::size_t> k1s = config.k1_values();
  const std::size_t cells = (k1s.size() - 1) * static_cast<std::size_t>(config.d_max + 1) + 1;
  if (cells > config.max_evaluations) {
    throw std::invalid_argument("grid needs " + std::to_string(cells) + " evaluations, budget is " +
                                std::to_string(config.max_evaluations));
  }
  GridResult result;
  for (std::size_t k1 : k1s) {
    const std::int32_t last = k1 == config.k_total ? 0 : config.d_max;
    for (std::int32_t d = 0; d <= last; ++d) result.entries.push_back({k1, d, evaluate(k1, d)});
  }
  GridEntry best = pick_best(result.entries, config.decay);
  result.best_k1 = best.k1;
  result.best_d = best.d;
  result.best_value = best.value;
  return result;
}

DelaySearchResult sequential_d_search(std::size_t k1, const SearchConfig& config, const PlanEvaluator& evaluate) {
  config.validate();
  DelaySearchResult result;
  if (k1 >= config.k_total) {
    result.probes.push_back({k1, 0, evaluate(k1, 0)});
  } else if (config.decay.is_constant_one()) {
    result.probes.push_back({k1, config.d_max, evaluate(k1, config.d_max)});
  } else {
    std::size_t misses = 0;
    double best = 0.0;
    for (std::int32_t d = 0; d <= config.d_max && misses < config.patience; ++d) {
      GridEntry e{k1, d, evaluate(k1, d)};
      if (result.probes.empty() || e.value.mean > best) {
        best = e.value.mean;
        misses = 0;
      } else {
        ++misses;
      }
      result.probes.push_back(e);
    }
  }
  const GridEntry* best = &result.probes.front();
  for (const GridEntry& e : result.probes) {
    if (e.value.mean > best->value.mean) best = &e;
  }
  result.d = best->d;
  result.value = best->value;
  return result;
}

ScheduleResult golden_section_k1(const SearchConfig& config, const PlanEvaluator& evaluate) {
  config.validate();
  const std::vector<std::size_t> k1s = config.k1_values();
  std::map<std::size_t, DelaySearchResult> memo;
  ScheduleResult result;

  auto value_at = [&](std::size_t index) {
    auto it = memo.find(index);
    if (it == memo.end()) {
      it = memo.emplace(index, sequential_d_search(k1s[index], config, evaluate)).first;
      result.probes.insert(result.probes.end(), it->second.probes.begin(), it->second.probes.end());
    }
    return it->second.value.mean;
  };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  std::size_t lo = 0;
  std::size_t hi = k1s.size() - 1;
  while (hi - lo > 3) {
    const double width = static_cast<double>(hi - lo);
    std::size_t left = hi - static_cast<std::size_t>(std::lround(width * inv_phi));
    std::size_t right = lo + static_cast<std::size_t>(std::lround(width * inv_phi));
    if (left >= right) right = left + 1;
    if (value_at(left) < value_at(right)) {
      lo = left;
    } else {
      hi = right;
    }
  }
  for (std::size_t i = lo; i <= hi; ++i) value_at(i);

  // Best probe overall; equal values keep the smaller k1.
  const DelaySearchResult* best = nullptr;
  std::size_t best_index = 0;
  for (const auto& [index, r] : memo) {
    if (best == nullptr || r.value.mean > best->value.mean) {
      best = &r;
      best_index = index;
    }
  }
  result.k1 = k1s[best_index];
  result.d = best->d;
  result.value = best->value;
  return result;
}

std::int32_t estimate_D(const InfluenceGraph& graph, std::size_t k, const MonteCarloConfig& mc, std::int32_t margin) {
  if (margin < 0) throw std::invalid_argument("margin must be non-negative");
  const std::size_t n = graph.num_nodes();
  if (n == 0) return margin;
  const SeedSet probe = select_wd(graph, std::min(std::max<std::size_t>(k, 1), n));
  const auto stop = static_cast<std::int32_t>(n);
  std::int32_t last = 0;
  const auto count = static_cast<std::int64_t>(mc.phase1_sims);
#pragma omp parallel reduction(max : last)
  {
    CascadeRunner runner(graph);
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) {
      SplitMix64 rng = make_stream(mc.master_seed, StreamTag::probe, i);
      runner.run(probe.nodes, rng, stop);
      last = std::max(last, static_cast<std::int32_t>(runner.new_per_step().size()) - 1);
    }
  }
  return std::min<std::int32_t>(last, static_cast<std::int32_t>(n)) + margin;
}

PlanEvaluator pipeline_evaluator(const InfluenceGraph& graph, std::size_t k, TwoPhasePlan shape,
                                 TwoPhaseConfig config) {
  return [&graph, k, shape, config](std::size_t k1, std::int32_t d) {
    TwoPhasePlan plan = shape;
    plan.k1 = k1;
    plan.k2 = k - k1;
    plan.d = d;
    return run_two_phase(graph, plan, config).spread;
  };
}

PlanEvaluator oracle_evaluator(const oracle::ExactModel& model, std::size_t k, DecayFunction decay) {
  return [&model, k, decay](std::size_t k1, std::int32_t d) {
    SpreadEstimate e;
    e.mean = model.best_f(k1, d, k - k1, decay);
    e.std_error = 0.0;
    return e;
  };
}

}  // namespace twophase
