#include "twophase/selectors.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace twophase {

namespace {

// Marks `nodes` in a fresh n-sized mask, validating ids.
std::vector<bool> mark(const InfluenceGraph& graph, std::span<const NodeId> nodes) {
  std::vector<bool> marked(graph.num_nodes(), false);
  for (NodeId v : nodes) {
    if (v >= graph.num_nodes()) throw std::out_of_range("node id out of range");
    marked[v] = true;
  }
  return marked;
}

void check_budget(std::size_t k, const std::vector<bool>& excluded) {
  std::size_t available = std::count(excluded.begin(), excluded.end(), false);
  if (k > available) {
    throw std::invalid_argument("budget " + std::to_string(k) + " exceeds the " + std::to_string(available) +
                                " selectable nodes");
  }
}

std::vector<NodeId> candidates_of(const std::vector<bool>& excluded) {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < excluded.size(); ++v) {
    if (!excluded[v]) out.push_back(v);
  }
  return out;
}

// Shared loop for SD and WD: score(v) over the graph with removed nodes deleted.
template <typename Weight>
SeedSet discount_select(const InfluenceGraph& graph, std::size_t k, std::span<const NodeId> preselected,
                        Weight weight) {
  std::vector<bool> removed = mark(graph, preselected);
  check_budget(k, removed);
  const std::size_t n = graph.num_nodes();
  std::vector<double> score(n, 0.0);
  for (NodeId u = 0; u < n; ++u) {
    for (const Arc& arc : graph.out_arcs(u)) {
      if (!removed[arc.node]) score[u] += weight(arc);
    }
  }
  SeedSet result;
  result.budget = k;
  for (std::size_t round = 0; round < k; ++round) {
    NodeId best = kNoNode;
    for (NodeId v = 0; v < n; ++v) {
      if (!removed[v] && (best == kNoNode || score[v] > score[best])) best = v;
    }
    removed[best] = true;
    result.nodes.push_back(best);
    for (const Arc& arc : graph.in_arcs(best)) score[arc.node] -= weight(arc);
  }
  return result;
}

}  // namespace

SetObjective sigma_objective(const InfluenceGraph& graph, std::size_t sims, std::uint64_t seed,
                             std::vector<NodeId> preselected) {
  MonteCarloConfig config;
  config.master_seed = seed;
  return [&graph, sims, config, pre = std::move(preselected)](std::span<const NodeId> set) {
    std::vector<NodeId> seeds(pre);
    seeds.insert(seeds.end(), set.begin(), set.end());
    return estimate_spread(graph, seeds, config, sims);
  };
}

GddState::GddState(const InfluenceGraph& graph, std::span<const NodeId> preselected)
    : graph_(&graph),
      survival_(graph.num_nodes(), 1.0),
      out_sum_(graph.num_nodes(), 0.0),
      selected_(graph.num_nodes(), false) {
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    for (const Arc& arc : graph.out_arcs(v)) {
      out_sum_[v] += arc.prob;
      ++edge_touches_;
    }
  }
  for (NodeId u : preselected) {
    if (u >= graph.num_nodes()) throw std::out_of_range("preselected node id out of range");
    if (!selected_[u]) select(u);
  }
}

NodeId GddState::best() const noexcept {
  NodeId best = kNoNode;
  double best_score = 0.0;
  for (NodeId v = 0; v < selected_.size(); ++v) {
    if (selected_[v]) continue;
    double s = score(v);
    if (best == kNoNode || s > best_score) {
      best = v;
      best_score = s;
    }
  }
  return best;
}

void GddState::select(NodeId u) {
  selected_[u] = true;
  for (const Arc& arc : graph_->out_arcs(u)) {
    survival_[arc.node] *= 1.0 - arc.prob;
    ++edge_touches_;
  }
  for (const Arc& arc : graph_->in_arcs(u)) {
    out_sum_[arc.node] -= arc.prob;
    ++edge_touches_;
  }
}

SeedSet select_sd(const InfluenceGraph& graph, std::size_t k, std::span<const NodeId> preselected) {
  return discount_select(graph, k, preselected, [](const Arc&) { return 1.0; });
}

SeedSet select_wd(const InfluenceGraph& graph, std::size_t k, std::span<const NodeId> preselected) {
  return discount_select(graph, k, preselected, [](const Arc& a) { return a.prob; });
}

SeedSet select_gdd(const InfluenceGraph& graph, std::size_t k, std::span<const NodeId> preselected,
                   GddStats* stats) {
  check_budget(k, mark(graph, preselected));
  GddState state(graph, preselected);
  SeedSet result;
  result.budget = k;
  for (std::size_t round = 0; round < k; ++round) {
    NodeId u = state.best();
    state.select(u);
    result.nodes.push_back(u);
  }
  if (stats != nullptr) stats->edge_touches = state.edge_touches();
  return result;
}

SeedSet select_greedy(const InfluenceGraph& graph, std::size_t k, const SetObjective& objective,
                      std::span<const NodeId> excluded) {
  std::vector<bool> taken = mark(graph, excluded);
  check_budget(k, taken);
  SeedSet result;
  result.budget = k;
  std::vector<NodeId> trial;
  for (std::size_t round = 0; round < k; ++round) {
    NodeId best = kNoNode;
    double best_value = 0.0;
    for (NodeId v = 0; v < graph.num_nodes(); ++v) {
      if (taken[v]) continue;
      trial = result.nodes;
      trial.push_back(v);
      double value = objective(trial).mean;
      if (best == kNoNode || value > best_value) {
        best = v;
        best_value = value;
      }
    }
    taken[best] = true;
    result.nodes.push_back(best);
    result.values.push_back(best_value);
  }
  return result;
}

SeedSet select_rmax(const InfluenceGraph& graph, std::size_t k, const SetObjective& objective,
                    std::size_t samples, std::uint64_t seed, std::span<const NodeId> excluded) {
  if (samples == 0) throw std::invalid_argument("RMax needs at least one sample");
  std::vector<bool> taken = mark(graph, excluded);
  check_budget(k, taken);
  const std::vector<NodeId> pool = candidates_of(taken);
  SeedSet result;
  result.budget = k;
  if (k == 0) return result;
  if (k == pool.size()) {
    result.nodes = pool;
    result.values.push_back(objective(pool).mean);
    return result;
  }
  double best_value = 0.0;
  std::vector<NodeId> set(k);
  for (std::size_t i = 0; i < samples; ++i) {
    SplitMix64 rng = make_stream(seed, StreamTag::random_sets, i);
    std::sample(pool.begin(), pool.end(), set.begin(), k, rng);
    double value = objective(set).mean;
    if (result.nodes.empty() || value > best_value) {
      result.nodes = set;
      best_value = value;
    }
  }
  result.values.push_back(best_value);
  return result;
}

std::vector<double> approximate_shapley(const InfluenceGraph& graph, const SetObjective& objective,
                                        std::size_t permutations, std::uint64_t seed,
                                        std::span<const NodeId> excluded) {
  if (permutations == 0) throw std::invalid_argument("Shapley sampling needs at least one permutation");
  const std::vector<NodeId> players = candidates_of(mark(graph, excluded));
  std::vector<double> phi(graph.num_nodes(), 0.0);
  const double empty_value = objective({}).mean;
  std::vector<NodeId> order(players);
  std::vector<NodeId> prefix;
  for (std::size_t p = 0; p < permutations; ++p) {
    order = players;
    SplitMix64 rng = make_stream(seed, StreamTag::shapley, p);
    std::shuffle(order.begin(), order.end(), rng);
    prefix.clear();
    double previous = empty_value;
    for (NodeId v : order) {
      prefix.push_back(v);
      double value = objective(prefix).mean;
      phi[v] += value - previous;
      previous = value;
    }
  }
  for (double& x : phi) x /= static_cast<double>(permutations);
  return phi;
}

SeedSet spic_from_values(const InfluenceGraph& graph, std::size_t k, std::vector<double> values,
                         std::span<const NodeId> excluded) {
  if (values.size() != graph.num_nodes()) throw std::invalid_argument("one value per node required");
  std::vector<bool> taken = mark(graph, excluded);
  check_budget(k, taken);
  SeedSet result;
  result.budget = k;
  for (std::size_t round = 0; round < k; ++round) {
    NodeId y = kNoNode;
    for (NodeId v = 0; v < graph.num_nodes(); ++v) {
      if (!taken[v] && (y == kNoNode || values[v] > values[y])) y = v;
    }
    taken[y] = true;
    result.nodes.push_back(y);
    const double phi_y = values[y];
    for (const Arc& arc : graph.out_arcs(y)) values[arc.node] *= 1.0 - arc.prob;
    for (const Arc& arc : graph.in_arcs(y)) values[arc.node] = std::max(0.0, values[arc.node] - arc.prob * phi_y);
  }
  return result;
}

SeedSet select_spic(const InfluenceGraph& graph, std::size_t k, const SetObjective& objective,
                    std::size_t permutations, std::uint64_t seed, std::span<const NodeId> excluded,
                    std::vector<double>* shapley_out) {
  check_budget(k, mark(graph, excluded));
  std::vector<double> phi = approximate_shapley(graph, objective, permutations, seed, excluded);
  if (shapley_out != nullptr) *shapley_out = phi;
  return spic_from_values(graph, k, std::move(phi), excluded);
}

}  // namespace twophase
