#include "twophase/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <tuple>

namespace twophase::oracle {

namespace {

int popcount(NodeMask m) { return std::popcount(m); }

NodeMask all_nodes(std::size_t n) { return n == 64 ? ~NodeMask{0} : (NodeMask{1} << n) - 1; }

NodeMask expand(const NodeMask* adj, NodeMask frontier) {
  NodeMask next = 0;
  while (frontier != 0) {
    int v = std::countr_zero(frontier);
    frontier &= frontier - 1;
    next |= adj[v];
  }
  return next;
}

NodeMask reach(const NodeMask* adj, NodeMask seeds, NodeMask blocked) {
  NodeMask visited = seeds & ~blocked;
  NodeMask frontier = visited;
  while (frontier != 0) {
    frontier = expand(adj, frontier) & ~visited & ~blocked;
    visited |= frontier;
  }
  return visited;
}

// sum over nodes reached from `seeds` of Gamma(offset + distance).
double decayed_reach(const NodeMask* adj, NodeMask seeds, NodeMask blocked,
                     const DecayFunction& gamma, std::int32_t offset) {
  NodeMask visited = seeds & ~blocked;
  NodeMask frontier = visited;
  double value = 0.0;
  std::int32_t t = offset;
  while (frontier != 0) {
    value += gamma(t) * popcount(frontier);
    frontier = expand(adj, frontier) & ~visited & ~blocked;
    visited |= frontier;
    ++t;
  }
  return value;
}

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

}  // namespace

NodeMask to_mask(std::span<const NodeId> nodes) {
  NodeMask m = 0;
  for (NodeId v : nodes) {
    if (v >= 64) throw CapExceeded("node id beyond the 64-node oracle limit");
    m |= NodeMask{1} << v;
  }
  return m;
}

std::vector<NodeId> from_mask(NodeMask mask) {
  std::vector<NodeId> nodes;
  while (mask != 0) {
    nodes.push_back(static_cast<NodeId>(std::countr_zero(mask)));
    mask &= mask - 1;
  }
  return nodes;
}

std::vector<LiveGraph> enumerate_live_graphs(const InfluenceGraph& graph, const OracleLimits& limits) {
  const std::size_t m = graph.num_edges();
  if (m > limits.max_edges || m >= 63) {
    throw CapExceeded("live-graph enumeration needs 2^" + std::to_string(m) + " graphs; cap is 2^" +
                      std::to_string(limits.max_edges));
  }
  const std::vector<Edge> edges = graph.edges();
  const std::uint64_t count = std::uint64_t{1} << m;
  std::vector<LiveGraph> live(count);
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    double p = 1.0;
    for (std::size_t i = 0; i < m; ++i) p *= ((mask >> i) & 1U) ? edges[i].prob : 1.0 - edges[i].prob;
    live[mask] = LiveGraph{mask, p};
  }
  std::stable_sort(live.begin(), live.end(),
                   [](const LiveGraph& a, const LiveGraph& b) { return a.probability > b.probability; });
  return live;
}

ExactModel::ExactModel(const InfluenceGraph& graph, OracleLimits limits)
    : n_(graph.num_nodes()), limits_(limits) {
  if (n_ > 64) throw CapExceeded("oracle supports at most 64 nodes, graph has " + std::to_string(n_));
  live_ = enumerate_live_graphs(graph, limits_);
  // Zero-probability live graphs contribute nothing; dropping them keeps
  // all-p=1 instances down to a single live graph.
  live_.erase(std::remove_if(live_.begin(), live_.end(),
                             [](const LiveGraph& x) { return x.probability == 0.0; }),
              live_.end());
  if (live_.size() * std::max<std::size_t>(n_, 1) > (std::size_t{1} << 27)) {
    throw CapExceeded("live-graph table too large for the oracle");
  }
  const std::vector<Edge> edges = graph.edges();
  adjacency_.assign(live_.size() * n_, 0);
  for (std::size_t x = 0; x < live_.size(); ++x) {
    NodeMask* adj = &adjacency_[x * n_];
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if ((live_[x].edge_mask >> i) & 1U) adj[edges[i].source] |= NodeMask{1} << edges[i].target;
    }
  }
}

double ExactModel::sigma(NodeMask seeds) const {
  double total = 0.0;
  for (std::size_t x = 0; x < live_.size(); ++x) {
    total += live_[x].probability * popcount(reach(adjacency(x), seeds, 0));
  }
  return total;
}

double ExactModel::nu(NodeMask seeds, const DecayFunction& decay) const {
  double total = 0.0;
  for (std::size_t x = 0; x < live_.size(); ++x) {
    total += live_[x].probability * decayed_reach(adjacency(x), seeds, 0, decay, 0);
  }
  return total;
}

double ExactModel::f(NodeMask s1, std::int32_t d, std::size_t k2, const DecayFunction& decay,
                     std::vector<std::pair<NodeMask, NodeMask>>* s2_witness) const {
  if (d < 0) throw std::invalid_argument("delay must be non-negative");
  if (k2 > n_) throw std::invalid_argument("k2 exceeds node count");
  const double work = static_cast<double>(live_.size()) * binomial(n_, k2);
  if (work > limits_.max_subset_work) {
    throw CapExceeded("exact second-phase search too large (" + std::to_string(work) + " evaluations)");
  }
  const NodeMask universe = all_nodes(n_);
  const bool plain = decay.is_constant_one();

  struct Entry {
    NodeMask already;
    NodeMask recent;
    std::size_t x;
    double already_value;
  };
  std::vector<Entry> entries;
  entries.reserve(live_.size());
  for (std::size_t x = 0; x < live_.size(); ++x) {
    const NodeMask* adj = adjacency(x);
    NodeMask visited = s1;
    NodeMask layer = s1;
    NodeMask already = 0;
    double already_value = 0.0;
    for (std::int32_t t = 0; t < d && layer != 0; ++t) {
      already |= layer;
      already_value += decay(t) * popcount(layer);
      layer = expand(adj, layer) & ~visited;
      visited |= layer;
    }
    entries.push_back({already, layer, x, already_value});
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.already, a.recent) < std::tie(b.already, b.recent);
  });

  double total = 0.0;
  std::size_t begin = 0;
  while (begin < entries.size()) {
    std::size_t end = begin;
    while (end < entries.size() && entries[end].already == entries[begin].already &&
           entries[end].recent == entries[begin].recent) {
      ++end;
    }
    const NodeMask already = entries[begin].already;
    const NodeMask recent = entries[begin].recent;
    const NodeMask candidates = universe & ~already & ~recent;

    auto value_of = [&](NodeMask s2) {
      double v = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        const NodeMask* adj = adjacency(entries[i].x);
        double r = plain ? static_cast<double>(popcount(reach(adj, recent | s2, already)))
                         : decayed_reach(adj, recent | s2, already, decay, d);
        v += live_[entries[i].x].probability * r;
      }
      return v;
    };

    double best = -1.0;
    NodeMask best_set = 0;
    if (static_cast<std::size_t>(popcount(candidates)) <= k2) {
      best = value_of(candidates);
      best_set = candidates;
    } else {
      for_each_subset(candidates, k2, [&](NodeMask s2) {
        double v = value_of(s2);
        if (v > best) {
          best = v;
          best_set = s2;
        }
      });
    }
    for (std::size_t i = begin; i < end; ++i) {
      total += live_[entries[i].x].probability * entries[i].already_value;
    }
    total += best;
    if (s2_witness != nullptr) s2_witness->emplace_back(recent | already, best_set);
    begin = end;
  }
  return total;
}

double ExactModel::best_sigma(std::size_t k, NodeMask* argmax) const {
  double best = -1.0;
  NodeMask best_set = 0;
  for_each_subset(all_nodes(n_), k, [&](NodeMask s) {
    double v = sigma(s);
    if (v > best) {
      best = v;
      best_set = s;
    }
  });
  if (argmax != nullptr) *argmax = best_set;
  return best;
}

double ExactModel::best_f(std::size_t k1, std::int32_t d, std::size_t k2, const DecayFunction& decay,
                          NodeMask* argmax) const {
  double best = -1.0;
  NodeMask best_set = 0;
  for_each_subset(all_nodes(n_), k1, [&](NodeMask s) {
    double v = f(s, d, k2, decay);
    if (v > best) {
      best = v;
      best_set = s;
    }
  });
  if (argmax != nullptr) *argmax = best_set;
  return best;
}

double exact_sigma(const InfluenceGraph& graph, std::span<const NodeId> seeds) {
  return ExactModel(graph).sigma(to_mask(seeds));
}

double exact_f(const InfluenceGraph& graph, std::span<const NodeId> s1, std::int32_t d, std::size_t k2) {
  return ExactModel(graph).f(to_mask(s1), d, k2);
}

double exact_nu(const InfluenceGraph& graph, std::span<const NodeId> seeds, const DecayFunction& decay) {
  return ExactModel(graph).nu(to_mask(seeds), decay);
}

}  // namespace twophase::oracle
