#include "twophase/cross_entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "twophase/rng.hpp"

namespace twophase {

CeConfig CeConfig::defaults_for(std::size_t n) {
  CeConfig c;
  c.n_min = std::max<std::size_t>(n, 1);
  c.n_max = 20 * c.n_min;
  c.n_elite = std::max<std::size_t>((n + 3) / 4, 1);
  return c;
}

void CeConfig::validate() const {
  if (n_min == 0 || n_min > n_max) throw std::invalid_argument("cross-entropy: need 1 <= n_min <= n_max");
  if (n_elite == 0 || n_elite > n_min) throw std::invalid_argument("cross-entropy: need 1 <= n_elite <= n_min");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("cross-entropy: alpha must lie in (0,1]");
  if (max_iterations == 0) throw std::invalid_argument("cross-entropy: max_iterations must be positive");
  if (reliability_window == 0) throw std::invalid_argument("cross-entropy: reliability_window must be positive");
}

CeDistribution init_weighted_from(std::span<const double> weights, std::size_t k1) {
  const std::size_t n = weights.size();
  if (k1 == 0 || k1 > n) throw std::invalid_argument("init_weighted: k1 must lie in [1, n]");
  CeDistribution dist;
  std::vector<double>& q = dist.node_probs;
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  q.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    q[i] = total > 0.0 ? static_cast<double>(k1) * weights[i] / total : static_cast<double>(k1) / n;
  }
  std::vector<bool> fixed(n, false);
  for (;;) {
    double surplus = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!fixed[i] && q[i] > 1.0) {
        surplus += q[i] - 1.0;
        q[i] = 1.0;
        fixed[i] = true;
      }
    }
    if (surplus == 0.0) break;
    double free_mass = 0.0;
    std::size_t free_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!fixed[i]) {
        free_mass += q[i];
        ++free_count;
      }
    }
    if (free_count == 0) break;
    for (std::size_t i = 0; i < n; ++i) {
      if (fixed[i]) continue;
      q[i] += free_mass > 0.0 ? surplus * q[i] / free_mass : surplus / static_cast<double>(free_count);
    }
  }
  return dist;
}

CeDistribution init_weighted(const InfluenceGraph& graph, std::size_t k1) {
  GddState state(graph);
  std::vector<double> w(graph.num_nodes());
  for (NodeId v = 0; v < graph.num_nodes(); ++v) w[v] = state.score(v);
  return init_weighted_from(w, k1);
}

namespace {

struct Draw {
  std::size_t k1 = 0;
  std::int32_t d = 0;
  std::vector<NodeId> set;
  double value = 0.0;
};

// Bernoulli draw from per-node probabilities, repaired to exactly `size`
// members. Greedy repair adds the most likely excluded nodes or drops the
// least likely included ones, equal probabilities ordered by a random key.
// Weighted repair orders by exponential keys, which is sampling without
// replacement in proportion to q (adding) or 1 - q (dropping).
std::vector<NodeId> sample_set(std::span<const double> p, std::span<const char> allowed, std::size_t size,
                               CeRepair repair, SplitMix64& rng) {
  const std::size_t n = p.size();
  std::vector<char> in(n);
  std::vector<double> key(n);
  std::size_t count = 0;
  for (std::size_t v = 0; v < n; ++v) {
    in[v] = rng.uniform() < p[v] && allowed[v];
    key[v] = rng.uniform();
    count += in[v];
  }
  if (repair == CeRepair::weighted && count != size) {
    const bool adding = count < size;
    for (std::size_t v = 0; v < n; ++v) {
      double w = adding ? p[v] : 1.0 - p[v];
      // Larger is picked first; zero weight goes last.
      key[v] = w > 0.0 ? std::log(std::max(key[v], 1e-300)) / w : -std::numeric_limits<double>::infinity();
    }
  }
  if (count != size) {
    const bool adding = count < size;
    std::vector<NodeId> pool;
    for (std::size_t v = 0; v < n; ++v) {
      if (allowed[v] && static_cast<bool>(in[v]) != adding) pool.push_back(static_cast<NodeId>(v));
    }
    std::sort(pool.begin(), pool.end(), [&](NodeId a, NodeId b) {
      if (repair == CeRepair::greedy && p[a] != p[b]) return adding ? p[a] > p[b] : p[a] < p[b];
      return key[a] > key[b];
    });
    std::size_t change = adding ? size - count : count - size;
    for (std::size_t i = 0; i < change; ++i) in[pool[i]] = adding;
  }
  std::vector<NodeId> set;
  set.reserve(size);
  for (std::size_t v = 0; v < n; ++v) {
    if (in[v]) set.push_back(static_cast<NodeId>(v));
  }
  return set;
}

std::size_t sample_categorical(std::span<const double> probs, SplitMix64& rng) {
  double u = rng.uniform() * std::accumulate(probs.begin(), probs.end(), 0.0);
  std::size_t last = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last = i;
    if (u < probs[i]) return i;
    u -= probs[i];
  }
  return last;
}

bool near_degenerate(std::span<const double> probs, double tol) {
  return std::all_of(probs.begin(), probs.end(), [tol](double q) { return q <= tol || q >= 1.0 - tol; });
}

void smooth(std::vector<double>& old, const std::vector<double>& fresh, double alpha) {
  for (std::size_t i = 0; i < old.size(); ++i) old[i] = alpha * fresh[i] + (1.0 - alpha) * old[i];
}

// Shared iteration loop. In joint mode each draw also carries (k1, d).
class CeEngine {
 public:
  CeEngine(std::size_t n, const CeConfig& config, CeDistribution dist, bool joint, std::size_t k,
           std::vector<char> allowed)
      : n_(n), config_(config), dist_(std::move(dist)), joint_(joint), k_(k), allowed_(std::move(allowed)) {}

  template <typename Eval>
  void run(Eval&& eval) {
    std::optional<double> previous_threshold;
    std::size_t still = 0;
    for (std::size_t it = 0; it < config_.max_iterations; ++it) {
      std::vector<Draw> draws;
      std::vector<Draw> elites;
      std::size_t target = config_.n_min;
      double threshold = 0.0;
      for (;;) {
        while (draws.size() < target) {
          SplitMix64 rng = make_stream(config_.seed, StreamTag::cross_entropy, (it << 32) | draws.size());
          Draw draw = sample(rng);
          draw.value = evaluate(draw, eval);
          draws.push_back(std::move(draw));
        }
        std::stable_sort(draws.begin(), draws.end(),
                         [](const Draw& a, const Draw& b) { return a.value > b.value; });
        elites = pick_elites(draws);
        threshold = elites.back().value;
        if (!previous_threshold || threshold > *previous_threshold || target >= config_.n_max) break;
        target = std::min(config_.n_max, target * 2);
      }
      update(elites);
      log_.push_back({it + 1, draws.size(), threshold, best_.value});

      bool still_now = previous_threshold &&
                       std::abs(threshold - *previous_threshold) <=
                           config_.reliability_tol * std::max(std::abs(*previous_threshold), 1e-12);
      still = still_now ? still + 1 : 0;
      bool reliable = still >= config_.reliability_window;
      bool settled = near_degenerate(dist_.node_probs, config_.degenerate_tol) &&
                     near_degenerate(dist_.k1_probs, config_.degenerate_tol) &&
                     near_degenerate(dist_.d_probs, config_.degenerate_tol);
      if (reliable || settled) break;
      previous_threshold = threshold;
    }
  }

  const Draw& best() const { return best_; }
  const CeDistribution& distribution() const { return dist_; }
  std::vector<CeIterationLog>& log() { return log_; }
  std::size_t evaluations() const { return cache_.size(); }

 private:
  Draw sample(SplitMix64& rng) {
    Draw draw;
    if (!joint_) {
      draw.k1 = k_;
      draw.set = sample_set(dist_.node_probs, allowed_, k_, config_.repair, rng);
      return draw;
    }
    draw.d = static_cast<std::int32_t>(sample_categorical(dist_.d_probs, rng));
    draw.k1 = draw.d == 0 ? k_ : sample_categorical(dist_.k1_probs, rng);
    // Node probabilities describe relative preference; rescale to the drawn budget.
    double mass = std::accumulate(dist_.node_probs.begin(), dist_.node_probs.end(), 0.0);
    std::vector<double> p(n_);
    for (std::size_t v = 0; v < n_; ++v) {
      double q = mass > 0.0 ? dist_.node_probs[v] * static_cast<double>(draw.k1) / mass
                            : static_cast<double>(draw.k1) / static_cast<double>(n_);
      p[v] = std::min(1.0, q);
    }
    draw.set = sample_set(p, allowed_, draw.k1, config_.repair, rng);
    return draw;
  }

  // Top n_elite draws; with distinct_elites, repeats of a set are skipped
  // (falling back to repeats when too few distinct sets were drawn).
  std::vector<Draw> pick_elites(const std::vector<Draw>& ranked) const {
    const std::size_t want = std::min(config_.n_elite, ranked.size());
    if (!config_.distinct_elites) return {ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(want)};
    std::vector<Draw> out;
    std::vector<char> taken(ranked.size(), 0);
    for (std::size_t i = 0; i < ranked.size() && out.size() < want; ++i) {
      bool repeat = std::any_of(out.begin(), out.end(), [&](const Draw& e) {
        return e.k1 == ranked[i].k1 && e.d == ranked[i].d && e.set == ranked[i].set;
      });
      if (!repeat) {
        out.push_back(ranked[i]);
        taken[i] = 1;
      }
    }
    for (std::size_t i = 0; i < ranked.size() && out.size() < want; ++i) {
      if (!taken[i]) out.push_back(ranked[i]);
    }
    std::stable_sort(out.begin(), out.end(), [](const Draw& a, const Draw& b) { return a.value > b.value; });
    return out;
  }

  template <typename Eval>
  double evaluate(const Draw& draw, Eval& eval) {
    std::vector<NodeId> key;
    key.reserve(draw.set.size() + 2);
    key.push_back(static_cast<NodeId>(draw.k1));
    key.push_back(static_cast<NodeId>(draw.d));
    key.insert(key.end(), draw.set.begin(), draw.set.end());
    auto [pos, fresh] = cache_.try_emplace(std::move(key), 0.0);
    if (fresh) {
      pos->second = eval(draw);
      if (!has_best_ || pos->second > best_.value) {
        best_ = draw;
        best_.value = pos->second;
        has_best_ = true;
      }
    }
    return pos->second;
  }

  void update(std::span<const Draw> elites) {
    double total = 0.0;
    for (const Draw& e : elites) total += std::max(e.value, 0.0);
    auto weight = [&](const Draw& e) {
      return total > 0.0 ? std::max(e.value, 0.0) / total : 1.0 / static_cast<double>(elites.size());
    };

    std::vector<double> nodes(n_, 0.0);
    for (const Draw& e : elites) {
      for (NodeId v : e.set) nodes[v] += weight(e);
    }
    smooth(dist_.node_probs, nodes, config_.alpha);
    if (!joint_) return;

    std::vector<double> ds(dist_.d_probs.size(), 0.0);
    std::vector<double> ks(dist_.k1_probs.size(), 0.0);
    double delayed = 0.0;
    for (const Draw& e : elites) {
      ds[e.d] += weight(e);
      // d = 0 pins k1 = k, so it says nothing about the split of a delayed plan.
      if (e.d > 0) {
        ks[e.k1] += weight(e);
        delayed += weight(e);
      }
    }
    smooth(dist_.d_probs, ds, config_.alpha);
    if (delayed > 0.0) {
      for (double& x : ks) x /= delayed;
      smooth(dist_.k1_probs, ks, config_.alpha);
    }
  }

  std::size_t n_;
  CeConfig config_;
  CeDistribution dist_;
  bool joint_;
  std::size_t k_;
  std::vector<char> allowed_;
  std::map<std::vector<NodeId>, double> cache_;
  Draw best_;
  bool has_best_ = false;
  std::vector<CeIterationLog> log_;
};

}  // namespace

FaceResult face_select(const InfluenceGraph& graph, std::size_t gamma, const SetObjective& objective,
                       const CeConfig& config, const CeDistribution* init, std::span<const NodeId> excluded) {
  const std::size_t n = graph.num_nodes();
  std::vector<char> allowed(n, 1);
  for (NodeId v : excluded) {
    if (v >= n) throw std::out_of_range("FACE: excluded node id out of range");
    allowed[v] = 0;
  }
  const std::size_t available = std::count(allowed.begin(), allowed.end(), 1);
  if (gamma == 0 || gamma > available) throw std::invalid_argument("FACE: budget must lie in [1, available nodes]");
  config.validate();
  CeDistribution dist;
  if (init != nullptr) {
    if (init->node_probs.size() != n) throw std::invalid_argument("FACE: initial distribution has wrong size");
    dist.node_probs = init->node_probs;
  } else {
    dist.node_probs.assign(n, static_cast<double>(gamma) / static_cast<double>(available));
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (!allowed[v]) dist.node_probs[v] = 0.0;
  }
  CeEngine engine(n, config, std::move(dist), false, gamma, std::move(allowed));
  engine.run([&](const Draw& d) { return objective(d.set).mean; });

  FaceResult result;
  result.seeds.nodes = engine.best().set;
  result.seeds.budget = gamma;
  result.value = engine.best().value;
  result.seeds.values.push_back(result.value);
  result.distribution = engine.distribution();
  result.log = std::move(engine.log());
  result.evaluations = engine.evaluations();
  return result;
}

JointResult face_joint_optimize(const InfluenceGraph& graph, std::size_t k, std::int32_t max_delay,
                                const PlanObjective& objective, const CeConfig& config) {
  const std::size_t n = graph.num_nodes();
  if (k == 0 || k > n) throw std::invalid_argument("FACE joint: budget must lie in [1, n]");
  if (max_delay < 1) throw std::invalid_argument("FACE joint: maximum delay must be at least 1");
  config.validate();
  CeDistribution dist;
  dist.node_probs.assign(n, static_cast<double>(k) / static_cast<double>(n));
  dist.k1_probs.assign(k + 1, 1.0 / static_cast<double>(k));
  dist.k1_probs[0] = 0.0;
  dist.d_probs.assign(static_cast<std::size_t>(max_delay) + 1, 1.0 / static_cast<double>(max_delay + 1));

  CeEngine engine(n, config, std::move(dist), true, k, std::vector<char>(n, 1));
  engine.run([&](const Draw& d) { return objective(d.k1, d.d, d.set).mean; });

  JointResult result;
  result.k1 = engine.best().k1;
  result.d = engine.best().d;
  result.seeds.nodes = engine.best().set;
  result.seeds.budget = result.k1;
  result.value = engine.best().value;
  result.distribution = engine.distribution();
  result.log = std::move(engine.log());
  result.evaluations = engine.evaluations();
  return result;
}

}  // namespace twophase
