#include <algorithm>
#include <stdexcept>

#include "twophase/diffusion.hpp"

namespace twophase::reference {

DiffusionTrace simulate_ic_serial(const InfluenceGraph& graph, std::span<const NodeId> seeds,
                                  SplitMix64& rng, std::optional<std::int32_t> stop_at) {
  const std::size_t n = graph.num_nodes();
  const std::int32_t stop = stop_at.value_or(static_cast<std::int32_t>(n));
  DiffusionTrace trace;
  trace.activation_time.assign(n, kNever);

  std::vector<NodeId> layer;
  for (NodeId s : seeds) {
    if (s >= n) throw std::out_of_range("seed node id out of range");
    if (trace.activation_time[s] == kNever) {
      trace.activation_time[s] = 0;
      layer.push_back(s);
    }
  }
  std::sort(layer.begin(), layer.end());
  trace.final_active_count = layer.size();

  std::int32_t t = 0;
  while (!layer.empty() && t < stop) {
    std::vector<NodeId> next;
    for (NodeId u : layer) {
      for (const Arc& arc : graph.out_arcs(u)) {
        if (trace.activation_time[arc.node] != kNever) continue;
        if (rng.uniform() < arc.prob) {
          trace.activation_time[arc.node] = t + 1;
          next.push_back(arc.node);
        }
      }
    }
    std::sort(next.begin(), next.end());
    trace.final_active_count += next.size();
    layer = std::move(next);
    ++t;
  }
  return trace;
}

SpreadEstimate estimate_spread_serial(const InfluenceGraph& graph, std::span<const NodeId> seeds,
                                      const MonteCarloConfig& config, std::size_t sims) {
  std::vector<double> values;
  values.reserve(sims);
  for (std::size_t i = 0; i < sims; ++i) {
    SplitMix64 rng = make_stream(config.master_seed, StreamTag::single_phase, i);
    values.push_back(static_cast<double>(simulate_ic_serial(graph, seeds, rng).final_active_count));
  }
  return summarize(values);
}

SpreadEstimate estimate_temporal_spread_serial(const InfluenceGraph& graph,
                                               std::span<const NodeId> seeds,
                                               const DecayFunction& decay,
                                               const MonteCarloConfig& config, std::size_t sims) {
  std::vector<double> values;
  values.reserve(sims);
  for (std::size_t i = 0; i < sims; ++i) {
    SplitMix64 rng = make_stream(config.master_seed, StreamTag::single_phase, i);
    DiffusionTrace trace = simulate_ic_serial(graph, seeds, rng);
    // Accumulate per step so the floating-point summation order matches the kernel.
    auto per_step = trace.new_per_step();
    double value = 0.0;
    for (std::size_t t = 0; t < per_step.size(); ++t) {
      value += decay(static_cast<std::int32_t>(t)) * static_cast<double>(per_step[t]);
    }
    values.push_back(value);
  }
  return summarize(values);
}

}  // namespace twophase::reference
