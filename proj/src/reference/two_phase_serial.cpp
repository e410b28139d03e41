#include <stdexcept>

#include "twophase/two_phase.hpp"

namespace twophase::reference {

TwoPhaseResult two_phase_spread_serial(const InfluenceGraph& graph, std::span<const NodeId> s1, std::int32_t d,
                                       std::size_t k2, const TwoPhaseConfig& config) {
  if (d < 0) throw std::invalid_argument("delay must be non-negative");
  const std::size_t m1 = config.mc.phase1_sims;
  const std::size_t m2 = config.mc.phase2_sims;
  std::vector<double> outer;
  std::vector<double> progression;

  for (std::size_t i = 0; i < m1; ++i) {
    SplitMix64 rng = make_stream(config.mc.master_seed, StreamTag::phase_one, i);
    DiffusionTrace first = simulate_ic_serial(graph, s1, rng, d);
    Observation obs = observe_at(first, d);
    std::vector<std::size_t> counts = first.new_per_step();

    double value = 0.0;
    for (std::int32_t t = 0; t < d && t < static_cast<std::int32_t>(counts.size()); ++t) {
      value += config.decay(t) * static_cast<double>(counts[t]);
    }

    ResidualGraph res = residual_graph(graph, obs.already);
    std::vector<NodeId> seeds = res.to_residual(obs.recent);
    std::size_t available = res.graph.num_nodes() - seeds.size();
    std::vector<NodeId> s2;
    if (k2 > 0 && available <= k2) {
      std::vector<bool> taken(res.graph.num_nodes(), false);
      for (NodeId v : seeds) taken[v] = true;
      for (NodeId v = 0; v < res.graph.num_nodes(); ++v) {
        if (!taken[v]) s2.push_back(v);
      }
    } else if (k2 > 0) {
      s2 = select_gdd(res.graph, k2, seeds).nodes;
    }
    seeds.insert(seeds.end(), s2.begin(), s2.end());

    double inner = 0.0;
    for (std::size_t j = 0; j < m2; ++j) {
      SplitMix64 rng2 = make_stream(config.mc.master_seed, StreamTag::phase_two, i * m2 + j);
      std::vector<std::size_t> steps = simulate_ic_serial(res.graph, seeds, rng2).new_per_step();
      double v = 0.0;
      for (std::size_t t = 0; t < steps.size(); ++t) {
        v += config.decay(d + static_cast<std::int32_t>(t)) * static_cast<double>(steps[t]);
      }
      inner += v;
    }
    outer.push_back(value + inner / static_cast<double>(m2));
  }

  TwoPhaseResult result;
  result.spread = summarize(outer);
  result.s1.assign(s1.begin(), s1.end());
  return result;
}

}  // namespace twophase::reference
