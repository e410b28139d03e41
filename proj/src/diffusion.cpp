#include "twophase/diffusion.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include <omp.h>

namespace twophase {

DecayFunction DecayFunction::exponential(double delta) {
  if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("decay delta must lie in [0,1]");
  return DecayFunction(delta, false);
}

void MonteCarloConfig::validate() const {
  if (single_phase_sims == 0 || phase1_sims == 0 || phase2_sims == 0) {
    throw std::invalid_argument("Monte-Carlo counts must be at least 1");
  }
}

std::vector<std::size_t> DiffusionTrace::new_per_step() const {
  std::vector<std::size_t> counts;
  for (std::int32_t t : activation_time) {
    if (t == kNever) continue;
    if (static_cast<std::size_t>(t) >= counts.size()) counts.resize(t + 1, 0);
    ++counts[t];
  }
  return counts;
}

CascadeRunner::CascadeRunner(const InfluenceGraph& graph)
    : graph_(&graph), time_(graph.num_nodes(), kNever) {}

std::size_t CascadeRunner::run(std::span<const NodeId> seeds, SplitMix64& rng, std::int32_t stop_at) {
  for (NodeId v : activated_) time_[v] = kNever;
  activated_.clear();
  per_step_.clear();
  frontier_.clear();

  for (NodeId s : seeds) {
    if (time_[s] != kNever) continue;
    time_[s] = 0;
    frontier_.push_back(s);
    activated_.push_back(s);
  }
  if (frontier_.empty()) return 0;
  per_step_.push_back(frontier_.size());
  std::sort(frontier_.begin(), frontier_.end());

  for (std::int32_t t = 0; t < stop_at; ++t) {
    next_.clear();
    for (NodeId u : frontier_) {
      for (const Arc& arc : graph_->out_arcs(u)) {
        if (time_[arc.node] == kNever && rng.bernoulli(arc.prob)) {
          time_[arc.node] = t + 1;
          next_.push_back(arc.node);
          activated_.push_back(arc.node);
        }
      }
    }
    if (next_.empty()) break;
    per_step_.push_back(next_.size());
    std::sort(next_.begin(), next_.end());
    std::swap(frontier_, next_);
  }
  return activated_.size();
}

namespace {

void check_seeds(const InfluenceGraph& graph, std::span<const NodeId> seeds) {
  for (NodeId s : seeds) {
    if (s >= graph.num_nodes()) throw std::out_of_range("seed node id out of range");
  }
}

std::int32_t default_stop(const InfluenceGraph& graph) {
  return static_cast<std::int32_t>(graph.num_nodes());
}

std::vector<double> decay_table(const DecayFunction& decay, std::size_t horizon) {
  std::vector<double> table(horizon + 2);
  for (std::size_t t = 0; t < table.size(); ++t) table[t] = decay(static_cast<std::int32_t>(t));
  return table;
}

}  // namespace

DiffusionTrace simulate_ic(const InfluenceGraph& graph, std::span<const NodeId> seeds,
                           SplitMix64& rng, std::optional<std::int32_t> stop_at) {
  check_seeds(graph, seeds);
  CascadeRunner runner(graph);
  DiffusionTrace trace;
  trace.final_active_count = runner.run(seeds, rng, stop_at.value_or(default_stop(graph)));
  trace.activation_time.assign(graph.num_nodes(), kNever);
  for (NodeId v : runner.activated()) trace.activation_time[v] = runner.time_of(v);
  return trace;
}

Observation observe_at(const DiffusionTrace& trace, std::int32_t d) {
  if (d < 0) throw std::invalid_argument("observation step must be non-negative");
  Observation obs;
  obs.at_step = d;
  for (NodeId v = 0; v < trace.activation_time.size(); ++v) {
    std::int32_t t = trace.activation_time[v];
    if (t == kNever) continue;
    if (t < d) {
      obs.already.push_back(v);
    } else if (t == d) {
      obs.recent.push_back(v);
    }
  }
  return obs;
}

std::vector<NodeId> ResidualGraph::to_residual(std::span<const NodeId> parent_ids) const {
  std::vector<NodeId> out;
  out.reserve(parent_ids.size());
  for (NodeId v : parent_ids) {
    if (from_parent[v] != kNoNode) out.push_back(from_parent[v]);
  }
  return out;
}

std::vector<NodeId> ResidualGraph::to_parent_ids(std::span<const NodeId> residual_ids) const {
  std::vector<NodeId> out;
  out.reserve(residual_ids.size());
  for (NodeId v : residual_ids) out.push_back(to_parent[v]);
  return out;
}

ResidualGraph residual_graph(const InfluenceGraph& graph, std::span<const NodeId> already) {
  check_seeds(graph, already);
  ResidualGraph res;
  std::vector<bool> removed(graph.num_nodes(), false);
  for (NodeId v : already) removed[v] = true;
  res.from_parent.assign(graph.num_nodes(), kNoNode);
  std::vector<std::string> labels;
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    if (removed[v]) continue;
    res.from_parent[v] = static_cast<NodeId>(res.to_parent.size());
    res.to_parent.push_back(v);
    labels.push_back(graph.label(v));
  }
  std::vector<Edge> edges;
  for (NodeId u = 0; u < graph.num_nodes(); ++u) {
    if (removed[u]) continue;
    for (const Arc& a : graph.out_arcs(u)) {
      if (!removed[a.node]) edges.push_back({res.from_parent[u], res.from_parent[a.node], a.prob});
    }
  }
  res.graph = InfluenceGraph::from_edges(res.to_parent.size(), std::move(edges), std::move(labels));
  return res;
}

SpreadEstimate summarize(std::span<const double> values) {
  SpreadEstimate est;
  est.samples = values.size();
  if (values.empty()) return est;
  double sum = 0.0;
  for (double v : values) sum += v;
  est.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - est.mean) * (v - est.mean);
    double var = ss / static_cast<double>(values.size() - 1);
    est.std_error = std::sqrt(var / static_cast<double>(values.size()));
  }
  return est;
}

SpreadEstimate estimate_spread(const InfluenceGraph& graph, std::span<const NodeId> seeds,
                               const MonteCarloConfig& config, std::size_t sims) {
  if (sims == 0) throw std::invalid_argument("sims must be at least 1");
  check_seeds(graph, seeds);
  std::vector<double> values(sims);
  const std::int32_t stop = default_stop(graph);
  const auto count = static_cast<std::int64_t>(sims);
#pragma omp parallel
  {
    CascadeRunner runner(graph);
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) {
      SplitMix64 rng = make_stream(config.master_seed, StreamTag::single_phase, i);
      values[i] = static_cast<double>(runner.run(seeds, rng, stop));
    }
  }
  return summarize(values);
}

SpreadEstimate estimate_temporal_spread(const InfluenceGraph& graph, std::span<const NodeId> seeds,
                                        const DecayFunction& decay, const MonteCarloConfig& config,
                                        std::size_t sims) {
  if (sims == 0) throw std::invalid_argument("sims must be at least 1");
  check_seeds(graph, seeds);
  std::vector<double> values(sims);
  const std::vector<double> gamma = decay_table(decay, graph.num_nodes());
  const std::int32_t stop = default_stop(graph);
  const auto count = static_cast<std::int64_t>(sims);
#pragma omp parallel
  {
    CascadeRunner runner(graph);
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) {
      SplitMix64 rng = make_stream(config.master_seed, StreamTag::single_phase, i);
      runner.run(seeds, rng, stop);
      double value = 0.0;
      auto per_step = runner.new_per_step();
      for (std::size_t t = 0; t < per_step.size(); ++t) {
        value += gamma[t] * static_cast<double>(per_step[t]);
      }
      values[i] = value;
    }
  }
  return summarize(values);
}

}  // namespace twophase
