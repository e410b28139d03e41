#include "twophase/two_phase.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <string>

namespace twophase {

namespace {

constexpr std::string_view kAlgorithmNames[] = {"sd", "wd", "gdd", "greedy", "rmax", "spic", "face"};

// Per-index mean and standard error of rows[i][t], padding short rows with 0.
void column_stats(const std::vector<std::vector<double>>& rows, std::vector<double>& mean,
                  std::vector<double>& stderr_out) {
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.size());
  mean.assign(width, 0.0);
  stderr_out.assign(width, 0.0);
  if (rows.empty()) return;
  const double count = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    for (std::size_t t = 0; t < r.size(); ++t) mean[t] += r[t];
  }
  for (double& m : mean) m /= count;
  if (rows.size() < 2) return;
  for (std::size_t t = 0; t < width; ++t) {
    double ss = 0.0;
    for (const auto& r : rows) {
      double x = t < r.size() ? r[t] : 0.0;
      ss += (x - mean[t]) * (x - mean[t]);
    }
    stderr_out[t] = std::sqrt(ss / (count - 1.0) / count);
  }
}

// Per-replicate progression of a plain single-phase run on the single-phase
// streams, i.e. the same replicates estimate_spread uses.
void single_phase_progression(const InfluenceGraph& graph, std::span<const NodeId> seeds,
                              const MonteCarloConfig& mc, TwoPhaseResult& result) {
  std::vector<std::vector<double>> rows(mc.single_phase_sims);
  const auto count = static_cast<std::int64_t>(mc.single_phase_sims);
  const auto stop = static_cast<std::int32_t>(graph.num_nodes());
#pragma omp parallel
  {
    CascadeRunner runner(graph);
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) {
      SplitMix64 rng = make_stream(mc.master_seed, StreamTag::single_phase, i);
      runner.run(seeds, rng, stop);
      rows[i].assign(runner.new_per_step().begin(), runner.new_per_step().end());
    }
  }
  column_stats(rows, result.progression, result.progression_stderr);
}

std::vector<NodeId> second_phase_choice(const InfluenceGraph& residual, std::span<const NodeId> recent,
                                        std::size_t k2, Algorithm algorithm, const TwoPhaseConfig& config,
                                        std::size_t replicate) {
  std::vector<bool> is_recent(residual.num_nodes(), false);
  for (NodeId v : recent) is_recent[v] = true;
  const std::size_t available = residual.num_nodes() - recent.size();
  if (k2 == 0) return {};
  if (available <= k2) {
    std::vector<NodeId> all;
    for (NodeId v = 0; v < residual.num_nodes(); ++v) {
      if (!is_recent[v]) all.push_back(v);
    }
    return all;
  }
  if (algorithm == Algorithm::gdd) return select_gdd(residual, k2, recent).nodes;

  SelectorOptions options = config.selector;
  options.seed = derive_seed(config.selector.seed, StreamTag::second_phase_selection, replicate);
  if (options.face) options.face->seed = options.seed;
  SetObjective objective;
  if (uses_objective(algorithm)) {
    objective = sigma_objective(residual, options.objective_sims,
                                derive_seed(config.mc.master_seed, StreamTag::second_phase_selection, replicate),
                                std::vector<NodeId>(recent.begin(), recent.end()));
  }
  return select_seeds(residual, algorithm, k2, objective, options, recent).nodes;
}

}  // namespace

Algorithm parse_algorithm(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kAlgorithmNames); ++i) {
    if (kAlgorithmNames[i] == name) return static_cast<Algorithm>(i);
  }
  throw std::invalid_argument("unknown algorithm '" + std::string(name) +
                              "' (expected sd, wd, gdd, greedy, rmax, spic or face)");
}

std::string_view to_string(Algorithm a) { return kAlgorithmNames[static_cast<std::size_t>(a)]; }

bool uses_objective(Algorithm a) {
  return a == Algorithm::greedy || a == Algorithm::rmax || a == Algorithm::spic || a == Algorithm::face;
}

PhaseMode parse_mode(std::string_view name) {
  if (name == "myopic") return PhaseMode::myopic;
  if (name == "farsighted") return PhaseMode::farsighted;
  throw std::invalid_argument("unknown mode '" + std::string(name) + "' (expected myopic or farsighted)");
}

std::string_view to_string(PhaseMode m) { return m == PhaseMode::myopic ? "myopic" : "farsighted"; }

SeedSet select_seeds(const InfluenceGraph& graph, Algorithm algorithm, std::size_t k,
                     const SetObjective& objective, const SelectorOptions& options,
                     std::span<const NodeId> preselected) {
  const std::size_t n = graph.num_nodes();
  if (uses_objective(algorithm) && !objective) throw std::invalid_argument("selector needs an objective");
  switch (algorithm) {
    case Algorithm::sd:
      return select_sd(graph, k, preselected);
    case Algorithm::wd:
      return select_wd(graph, k, preselected);
    case Algorithm::gdd:
      return select_gdd(graph, k, preselected);
    case Algorithm::greedy:
      return select_greedy(graph, k, objective, preselected);
    case Algorithm::rmax:
      return select_rmax(graph, k, objective, options.rmax_samples ? options.rmax_samples : 5 * n, options.seed,
                         preselected);
    case Algorithm::spic:
      return select_spic(graph, k, objective, options.spic_permutations ? options.spic_permutations : 5 * n,
                         options.seed, preselected);
    case Algorithm::face: {
      if (k == 0) return SeedSet{};
      CeConfig ce = options.face.value_or(CeConfig::defaults_for(n));
      if (!options.face) ce.seed = options.seed;
      return face_select(graph, k, objective, ce, nullptr, preselected).seeds;
    }
  }
  throw std::logic_error("unhandled algorithm");
}

void TwoPhasePlan::validate(std::size_t num_nodes) const {
  if (d < 0) throw std::invalid_argument("delay must be non-negative");
  if (k1 + k2 > num_nodes) {
    throw std::invalid_argument("total budget " + std::to_string(k1 + k2) + " exceeds node count " +
                                std::to_string(num_nodes));
  }
}

TwoPhaseResult two_phase_spread(const InfluenceGraph& graph, std::span<const NodeId> s1, std::int32_t d,
                                std::size_t k2, const TwoPhaseConfig& config, Algorithm second) {
  if (d < 0) throw std::invalid_argument("delay must be non-negative");
  config.mc.validate();
  for (NodeId v : s1) {
    if (v >= graph.num_nodes()) throw std::out_of_range("first-phase seed out of range");
  }
  const std::size_t m1 = config.mc.phase1_sims;
  const std::size_t m2 = config.mc.phase2_sims;
  const DecayFunction& decay = config.decay;
  const std::size_t keep = std::min(config.keep_s2_examples, m1);

  std::vector<double> outer(m1);
  std::vector<std::vector<double>> rows(m1);
  std::vector<SecondPhaseExample> examples(keep);
  std::exception_ptr failure;

#pragma omp parallel
  {
    CascadeRunner phase1(graph);
    std::vector<NodeId> already;
    std::vector<NodeId> recent;
#pragma omp for schedule(dynamic)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(m1); ++i) {
      try {
        SplitMix64 rng = make_stream(config.mc.master_seed, StreamTag::phase_one, i);
        phase1.run(s1, rng, d);
        already.clear();
        recent.clear();
        for (NodeId v : phase1.activated()) (phase1.time_of(v) < d ? already : recent).push_back(v);
        std::sort(already.begin(), already.end());
        std::sort(recent.begin(), recent.end());

        std::vector<double>& row = rows[i];
        const auto per_step = phase1.new_per_step();
        double already_value = 0.0;
        for (std::size_t t = 0; t < per_step.size() && static_cast<std::int32_t>(t) < d; ++t) {
          already_value += decay(static_cast<std::int32_t>(t)) * static_cast<double>(per_step[t]);
          row.push_back(static_cast<double>(per_step[t]));
        }
        row.resize(static_cast<std::size_t>(d), 0.0);

        ResidualGraph res = residual_graph(graph, already);
        std::vector<NodeId> seeds = res.to_residual(recent);
        std::vector<NodeId> s2 = second_phase_choice(res.graph, seeds, k2, second, config, i);
        if (static_cast<std::size_t>(i) < keep) {
          examples[i] = {static_cast<std::size_t>(i), already.size(), recent, res.to_parent_ids(s2)};
        }
        seeds.insert(seeds.end(), s2.begin(), s2.end());

        CascadeRunner phase2(res.graph);
        const auto stop = static_cast<std::int32_t>(res.graph.num_nodes());
        double inner_sum = 0.0;
        for (std::size_t j = 0; j < m2; ++j) {
          SplitMix64 rng2 = make_stream(config.mc.master_seed, StreamTag::phase_two, i * m2 + j);
          phase2.run(seeds, rng2, stop);
          const auto steps = phase2.new_per_step();
          double value = 0.0;
          if (row.size() < static_cast<std::size_t>(d) + steps.size()) row.resize(d + steps.size(), 0.0);
          for (std::size_t t = 0; t < steps.size(); ++t) {
            value += decay(d + static_cast<std::int32_t>(t)) * static_cast<double>(steps[t]);
            row[d + t] += static_cast<double>(steps[t]) / static_cast<double>(m2);
          }
          inner_sum += value;
        }
        outer[i] = already_value + inner_sum / static_cast<double>(m2);
      } catch (...) {
#pragma omp critical(two_phase_failure)
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);

  TwoPhaseResult result;
  result.spread = summarize(outer);
  result.s1.assign(s1.begin(), s1.end());
  result.realized_s2_examples = std::move(examples);
  column_stats(rows, result.progression, result.progression_stderr);
  return result;
}

SpreadEstimate eval_h(const InfluenceGraph& graph, std::span<const NodeId> s1, std::int32_t d, std::size_t k2,
                      const TwoPhaseConfig& config) {
  TwoPhaseConfig c = config;
  c.keep_s2_examples = 0;
  return two_phase_spread(graph, s1, d, k2, c, Algorithm::gdd).spread;
}

SpreadEstimate eval_g(const InfluenceGraph& graph, std::span<const NodeId> s1, std::int32_t d, std::size_t k2,
                      const TwoPhaseConfig& config) {
  TwoPhaseConfig c = config;
  c.keep_s2_examples = 0;
  return two_phase_spread(graph, s1, d, k2, c, Algorithm::greedy).spread;
}

SeedSet select_first_phase(const InfluenceGraph& graph, const TwoPhasePlan& plan, const TwoPhaseConfig& config) {
  plan.validate(graph.num_nodes());
  if (plan.k1 == 0) return SeedSet{};
  SetObjective objective;
  if (uses_objective(plan.first)) {
    MonteCarloConfig mc = config.mc;
    mc.master_seed = derive_seed(config.mc.master_seed, StreamTag::objective, 0);
    if (plan.mode == PhaseMode::myopic) {
      const std::size_t sims = config.selector.objective_sims;
      objective = [&graph, &config, mc, sims](std::span<const NodeId> set) {
        return config.decay.is_constant_one() ? estimate_spread(graph, set, mc, sims)
                                              : estimate_temporal_spread(graph, set, config.decay, mc, sims);
      };
    } else {
      TwoPhaseConfig inner = config;
      inner.mc = mc;
      inner.mc.phase1_sims = config.farsighted_phase1_sims;
      inner.mc.phase2_sims = config.farsighted_phase2_sims;
      inner.keep_s2_examples = 0;
      objective = [&graph, inner, plan](std::span<const NodeId> set) {
        return two_phase_spread(graph, set, plan.d, plan.k2, inner, plan.second).spread;
      };
    }
  }
  return select_seeds(graph, plan.first, plan.k1, objective, config.selector);
}

TwoPhaseResult run_two_phase(const InfluenceGraph& graph, const TwoPhasePlan& plan, const TwoPhaseConfig& config) {
  SeedSet s1 = select_first_phase(graph, plan, config);
  if (plan.k2 == 0 && plan.d == 0) {
    TwoPhaseResult result;
    result.s1 = s1.nodes;
    const std::size_t sims = config.mc.single_phase_sims;
    result.spread = config.decay.is_constant_one()
                        ? estimate_spread(graph, s1.nodes, config.mc, sims)
                        : estimate_temporal_spread(graph, s1.nodes, config.decay, config.mc, sims);
    single_phase_progression(graph, s1.nodes, config.mc, result);
    return result;
  }
  TwoPhaseResult result = two_phase_spread(graph, s1.nodes, plan.d, plan.k2, config, plan.second);
  return result;
}

}  // namespace twophase
