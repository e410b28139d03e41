#include <gtest/gtest.h>

#include <omp.h>

#include "test_util.hpp"
#include "twophase/diffusion.hpp"

using namespace twophase;

namespace {

MonteCarloConfig mc(std::uint64_t seed = 7) {
  MonteCarloConfig c;
  c.master_seed = seed;
  return c;
}

InfluenceGraph single_edge(double p) { return InfluenceGraph::from_edges(2, {{0, 1, p}}); }

}  // namespace

TEST(SimulateIc, DeterministicChain) {
  InfluenceGraph g = testutil::chain(3, 1.0);
  SplitMix64 rng(1);
  std::vector<NodeId> seeds{0};
  DiffusionTrace t = simulate_ic(g, seeds, rng);
  EXPECT_EQ(t.activation_time, (std::vector<std::int32_t>{0, 1, 2}));
  EXPECT_EQ(t.final_active_count, 3u);
}

TEST(SimulateIc, ZeroProbabilitiesActivateOnlySeeds) {
  InfluenceGraph g = InfluenceGraph::from_edges(4, {{0, 1, 0.0}, {1, 2, 0.0}, {2, 3, 0.0}});
  SplitMix64 rng(3);
  std::vector<NodeId> seeds{0, 2};
  DiffusionTrace t = simulate_ic(g, seeds, rng);
  EXPECT_EQ(t.activation_time, (std::vector<std::int32_t>{0, kNever, 0, kNever}));
}

TEST(SimulateIc, OutOfRangeSeed) {
  SplitMix64 rng(1);
  std::vector<NodeId> seeds{5};
  EXPECT_THROW(simulate_ic(example1_graph(), seeds, rng), std::out_of_range);
  EXPECT_THROW(estimate_spread(example1_graph(), seeds, mc(), 10), std::out_of_range);
}

TEST(SimulateIc, BernoulliEdgeFrequency) {
  InfluenceGraph g = single_edge(0.5);
  std::vector<NodeId> seeds{0};
  SpreadEstimate e = estimate_spread(g, seeds, mc(), 100000);
  // spread = 1 + [b active]
  EXPECT_NEAR(e.mean - 1.0, 0.5, 3 * e.std_error);
}

TEST(SimulateIc, TraceInvariants) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    InfluenceGraph g = testutil::random_graph(s, 10, 25);
    std::vector<NodeId> seeds{0, 3};
    SplitMix64 rng(s);
    DiffusionTrace t = simulate_ic(g, seeds, rng);
    std::size_t active = 0;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      std::int32_t tv = t.activation_time[v];
      if (tv == kNever) continue;
      ++active;
      bool is_seed = v == 0 || v == 3;
      EXPECT_EQ(tv == 0, is_seed);
      if (tv >= 1) {
        bool has_parent = false;
        for (const Arc& a : g.in_arcs(v)) has_parent |= t.activation_time[a.node] == tv - 1;
        EXPECT_TRUE(has_parent);
      }
    }
    EXPECT_EQ(active, t.final_active_count);
  }
}

TEST(SimulateIc, RunnerReuseMatchesFreshTrace) {
  InfluenceGraph g = testutil::random_graph(11, 12, 30);
  CascadeRunner runner(g);
  for (std::uint64_t i = 0; i < 50; ++i) {
    std::vector<NodeId> seeds{static_cast<NodeId>(i % 12)};
    SplitMix64 a(i), b(i);
    std::size_t count = runner.run(seeds, a, 12);
    DiffusionTrace t = reference::simulate_ic_serial(g, seeds, b);
    EXPECT_EQ(count, t.final_active_count);
    for (NodeId v = 0; v < 12; ++v) EXPECT_EQ(runner.time_of(v), t.activation_time[v]);
  }
}

TEST(ObserveAt, ChainObservations) {
  InfluenceGraph g = testutil::chain(3, 1.0);
  std::vector<NodeId> seeds{0};
  SplitMix64 rng(1);
  DiffusionTrace t = simulate_ic(g, seeds, rng, 1);
  Observation y = observe_at(t, 1);
  EXPECT_EQ(y.already, (std::vector<NodeId>{0}));
  EXPECT_EQ(y.recent, (std::vector<NodeId>{1}));
  Observation y0 = observe_at(t, 0);
  EXPECT_TRUE(y0.already.empty());
  EXPECT_EQ(y0.recent, (std::vector<NodeId>{0}));
  EXPECT_THROW(observe_at(t, -1), std::invalid_argument);
}

TEST(ObserveAt, DiedBeforeDelay) {
  InfluenceGraph g = testutil::chain(3, 1.0);
  std::vector<NodeId> seeds{0};
  SplitMix64 rng(1);
  Observation y = observe_at(simulate_ic(g, seeds, rng), 5);
  EXPECT_EQ(y.already.size(), 3u);
  EXPECT_TRUE(y.recent.empty());
}

TEST(ObserveAt, Example1TwoObservationsEquallyLikely) {
  InfluenceGraph g = example1_graph();
  std::vector<NodeId> seeds{0};
  int with_b = 0;
  const int runs = 20000;
  for (int i = 0; i < runs; ++i) {
    SplitMix64 rng = make_stream(99, StreamTag::phase_one, i);
    Observation y = observe_at(simulate_ic(g, seeds, rng, 1), 1);
    ASSERT_EQ(y.already, (std::vector<NodeId>{0}));
    if (y.recent.empty()) continue;
    ASSERT_EQ(y.recent, (std::vector<NodeId>{1}));
    ++with_b;
  }
  double share = static_cast<double>(with_b) / runs;
  EXPECT_NEAR(share, 0.5, 3 * std::sqrt(0.25 / runs));
}

TEST(ResidualGraph, EmptyAlreadyKeepsGraph) {
  InfluenceGraph g = example1_graph();
  ResidualGraph r = residual_graph(g, {});
  EXPECT_EQ(r.graph, g);
}

TEST(ResidualGraph, AllRemoved) {
  std::vector<NodeId> all{0, 1, 2, 3};
  ResidualGraph r = residual_graph(example1_graph(), all);
  EXPECT_EQ(r.graph.num_nodes(), 0u);
  EXPECT_EQ(r.graph.num_edges(), 0u);
}

TEST(ResidualGraph, Example1WithoutA) {
  std::vector<NodeId> already{0};
  ResidualGraph r = residual_graph(example1_graph(), already);
  ASSERT_EQ(r.graph.num_nodes(), 3u);
  EXPECT_EQ(r.graph.labels(), (std::vector<std::string>{"B", "C", "D"}));
  EXPECT_EQ(r.graph.edges(), (std::vector<Edge>{{0, 1, 0.8}, {0, 2, 0.9}}));
  EXPECT_EQ(r.to_parent, (std::vector<NodeId>{1, 2, 3}));
  std::vector<NodeId> parent{0, 2};
  EXPECT_EQ(r.to_residual(parent), (std::vector<NodeId>{1}));
}

TEST(EstimateSpread, AllNodesSeeded) {
  InfluenceGraph g = testutil::random_graph(5, 8, 12);
  std::vector<NodeId> all{0, 1, 2, 3, 4, 5, 6, 7};
  SpreadEstimate e = estimate_spread(g, all, mc(), 500);
  EXPECT_EQ(e.mean, 8.0);
  EXPECT_EQ(e.std_error, 0.0);
  EXPECT_EQ(e.samples, 500u);
}

TEST(EstimateSpread, EmptySeedSet) {
  SpreadEstimate e = estimate_spread(example1_graph(), {}, mc(), 100);
  EXPECT_EQ(e.mean, 0.0);
}

TEST(EstimateSpread, Example1FromB) {
  std::vector<NodeId> seeds{1};
  SpreadEstimate e = estimate_spread(example1_graph(), seeds, mc(), 100000);
  EXPECT_NEAR(e.mean, testutil::naive_sigma(example1_graph(), seeds), 3 * e.std_error);
  EXPECT_NEAR(e.mean, 2.7, 3 * e.std_error);
}

TEST(EstimateSpread, DeterministicPerSeed) {
  InfluenceGraph g = testutil::random_graph(8, 30, 90);
  std::vector<NodeId> seeds{0, 1};
  SpreadEstimate a = estimate_spread(g, seeds, mc(5), 3000);
  SpreadEstimate b = estimate_spread(g, seeds, mc(5), 3000);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_error, b.std_error);
  SpreadEstimate c = estimate_spread(g, seeds, mc(6), 3000);
  EXPECT_NE(a.mean, c.mean);
}

TEST(EstimateSpread, ParallelMatchesSerialReference) {
  InfluenceGraph g = testutil::random_graph(21, 40, 160);
  std::vector<NodeId> seeds{2, 9, 17};
  const int saved = omp_get_max_threads();
  for (int threads : {1, 2, 4}) {
    omp_set_num_threads(threads);
    SpreadEstimate par = estimate_spread(g, seeds, mc(), 2000);
    SpreadEstimate ser = reference::estimate_spread_serial(g, seeds, mc(), 2000);
    EXPECT_EQ(par.mean, ser.mean) << threads;
    EXPECT_EQ(par.std_error, ser.std_error) << threads;

    DecayFunction decay = DecayFunction::exponential(0.7);
    SpreadEstimate tp = estimate_temporal_spread(g, seeds, decay, mc(), 2000);
    SpreadEstimate ts = reference::estimate_temporal_spread_serial(g, seeds, decay, mc(), 2000);
    EXPECT_EQ(tp.mean, ts.mean) << threads;
    EXPECT_EQ(tp.std_error, ts.std_error) << threads;
  }
  omp_set_num_threads(saved);
}

TEST(TemporalSpread, ConstantDecayEqualsSpread) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    InfluenceGraph g = testutil::random_graph(s, 10, 20);
    std::vector<NodeId> seeds{0, 4};
    SpreadEstimate a = estimate_spread(g, seeds, mc(s), 1000);
    SpreadEstimate b = estimate_temporal_spread(g, seeds, DecayFunction::constant_one(), mc(s), 1000);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.std_error, b.std_error);
  }
}

TEST(TemporalSpread, DeterministicChain) {
  InfluenceGraph g = testutil::chain(2, 1.0);
  std::vector<NodeId> seeds{0};
  SpreadEstimate e = estimate_temporal_spread(g, seeds, DecayFunction::exponential(0.5), mc(), 100);
  EXPECT_DOUBLE_EQ(e.mean, 1.5);
  EXPECT_EQ(e.std_error, 0.0);
}

TEST(TemporalSpread, HalfEdgeHalfDecay) {
  std::vector<NodeId> seeds{0};
  SpreadEstimate e = estimate_temporal_spread(single_edge(0.5), seeds, DecayFunction::exponential(0.5), mc(), 100000);
  EXPECT_NEAR(e.mean, 1.25, 3 * e.std_error);
}

TEST(TemporalSpread, NeverExceedsCount) {
  InfluenceGraph g = testutil::random_graph(3, 12, 30);
  std::vector<NodeId> seeds{1};
  DecayFunction decay = DecayFunction::exponential(0.6);
  for (std::uint64_t i = 0; i < 200; ++i) {
    SplitMix64 rng(i);
    DiffusionTrace t = simulate_ic(g, seeds, rng);
    double by_node = 0.0;
    for (std::int32_t tv : t.activation_time) {
      if (tv != kNever) by_node += decay(tv);
    }
    double by_step = 0.0;
    auto per_step = t.new_per_step();
    for (std::size_t s = 0; s < per_step.size(); ++s) by_step += decay(static_cast<std::int32_t>(s)) * per_step[s];
    EXPECT_NEAR(by_node, by_step, 1e-12);
    EXPECT_LE(by_node, static_cast<double>(t.final_active_count) + 1e-12);
  }
}

TEST(DecayFunctionTest, Validation) {
  EXPECT_THROW(DecayFunction::exponential(1.5), std::invalid_argument);
  EXPECT_THROW(DecayFunction::exponential(-0.1), std::invalid_argument);
  DecayFunction d = DecayFunction::exponential(0.5);
  EXPECT_EQ(d(0), 1.0);
  EXPECT_EQ(d(3), 0.125);
  EXPECT_TRUE(DecayFunction::exponential(1.0).is_constant_one());
}

TEST(MonteCarloConfigTest, RejectsZeroCounts) {
  MonteCarloConfig c;
  c.phase2_sims = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_THROW(estimate_spread(example1_graph(), {}, mc(), 0), std::invalid_argument);
}

TEST(StreamDerivation, DistinctStreams) {
  EXPECT_NE(derive_seed(1, StreamTag::phase_one, 0), derive_seed(1, StreamTag::phase_two, 0));
  EXPECT_NE(derive_seed(1, StreamTag::phase_one, 0), derive_seed(1, StreamTag::phase_one, 1));
  EXPECT_NE(derive_seed(1, StreamTag::phase_one, 0), derive_seed(2, StreamTag::phase_one, 0));
  EXPECT_EQ(derive_seed(1, StreamTag::phase_one, 7), derive_seed(1, StreamTag::phase_one, 7));
}
