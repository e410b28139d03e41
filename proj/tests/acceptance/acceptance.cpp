// Acceptance suite: one PASS/FAIL line per criterion. Exact reference values
// come from the naive enumerator in test_util.hpp, not from the library's
// oracle, wherever the criterion compares against an exact quantity.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "test_util.hpp"
#include "twophase/cross_entropy.hpp"
#include "twophase/experiment.hpp"
#include "twophase/oracle.hpp"
#include "twophase/schedule.hpp"
#include "twophase/selectors.hpp"
#include "twophase/two_phase.hpp"

using namespace twophase;
namespace ex = twophase::experiment;
using json = ex::json;
using oracle::NodeMask;

namespace {

std::filesystem::path g_out;
std::vector<std::filesystem::path> g_records;

struct Verdict {
  bool pass = true;
  std::string detail;
};

// Runs a command through the same path the CLI uses and keeps its record.
json run_command(const std::string& command, const json& args) {
  auto start = std::chrono::steady_clock::now();
  ex::Outcome out = ex::execute(command, args);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json record = ex::make_record(command, args, out, secs);
  std::string stem = command + "-" + std::to_string(g_records.size());
  g_records.push_back(ex::write_record(g_out, stem, record, out.csv));
  return out.results;
}

std::string fmt(const char* f, auto... xs) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, xs...);
  return buf;
}

InfluenceGraph small_instance(std::uint64_t seed) {
  // 8 nodes and at most 12 edges.
  return testutil::random_graph(seed, 8, 12);
}

std::vector<NodeId> ids(NodeMask m) { return oracle::from_mask(m); }

// ---------------------------------------------------------------------------

Verdict criterion1() {
  json r = run_command("oracle", {{"graph", "example1"}, {"query", "f"}, {"s1", {"A"}}, {"d", 1}, {"k2", 1}});
  double v = r.at("value").get<double>();
  return {std::abs(v - 3.8) <= 1e-9, fmt("f({A}, d=1, k2=1) = %.15g", v)};
}

Verdict criterion2() {
  const std::map<std::string, double> expected{{"", 2.7},    {"C", 2.95}, {"D", 2.9},  {"C,D", 3.5},
                                               {"A", 3.84}, {"B", 3.7},  {"A,B", 3.98}};
  std::map<std::string, double> got;
  Verdict v;
  double worst = 0.0;
  for (const auto& [set, want] : expected) {
    json s1 = json::array();
    for (std::size_t i = 0; i < set.size(); i += 2) s1.push_back(std::string(1, set[i]));
    json r = run_command("oracle", {{"graph", "example1"}, {"query", "f"}, {"s1", s1}, {"d", 3}, {"k2", 1}});
    got[set] = r.at("value").get<double>();
    worst = std::max(worst, std::abs(got[set] - want));
  }
  bool values = worst <= 1e-9;
  bool not_submodular = got["C"] - got[""] < got["C,D"] - got["D"];
  bool not_supermodular = got["A"] - got[""] > got["A,B"] - got["B"];
  v.pass = values && not_submodular && not_supermodular;
  v.detail = fmt("max |error| = %.2e; non-submodular %s; non-supermodular %s", worst,
                 not_submodular ? "holds" : "VIOLATED", not_supermodular ? "holds" : "VIOLATED");
  return v;
}

Verdict criterion3() {
  std::mt19937_64 pick(3);
  std::size_t checks = 0, misses = 0;
  double worst_ratio = 0.0;
  for (std::uint64_t gi = 0; gi < 50; ++gi) {
    InfluenceGraph g = small_instance(1000 + gi);
    const std::size_t n = g.num_nodes();
    for (int si = 0; si < 20; ++si) {
      std::size_t size = 1 + pick() % 3;
      std::vector<NodeId> all(n);
      std::iota(all.begin(), all.end(), 0);
      std::shuffle(all.begin(), all.end(), pick);
      std::vector<NodeId> seeds(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(size));
      MonteCarloConfig mc;
      mc.master_seed = gi * 100 + static_cast<std::uint64_t>(si);
      SpreadEstimate e = estimate_spread(g, seeds, mc, 100000);
      double exact = testutil::naive_sigma(g, seeds);
      double tol = std::max(3.0 * e.std_error, 0.01 * static_cast<double>(n));
      double err = std::abs(e.mean - exact);
      worst_ratio = std::max(worst_ratio, err / tol);
      ++checks;
      misses += err > tol;
    }
  }
  return {misses == 0, fmt("%zu/%zu estimates within tolerance; worst error/tolerance = %.3f", checks - misses, checks,
                           worst_ratio)};
}

Verdict criterion4() {
  std::size_t violations = 0, checks = 0;
  std::string first;
  auto check = [&](bool ok, const std::string& what) {
    ++checks;
    if (!ok) {
      if (violations++ == 0) first = what;
    }
  };
  const double eps = 1e-9;
  for (std::uint64_t gi = 0; gi < 50; ++gi) {
    InfluenceGraph g = small_instance(1000 + gi);
    oracle::ExactModel model(g);
    const std::size_t n = g.num_nodes();
    const NodeMask full = (NodeMask{1} << n) - 1;
    const std::string tag = "graph " + std::to_string(gi);

    // The library's exact model must agree with the naive enumerator first.
    for (NodeMask s : {NodeMask{1}, NodeMask{6}, NodeMask{0x29}}) {
      check(std::abs(model.sigma(s) - testutil::naive_sigma(g, ids(s))) <= eps, tag + ": sigma vs naive");
      check(std::abs(model.f(s, 1, 1) - testutil::naive_f(g, ids(s), 1, 1)) <= eps, tag + ": f vs naive");
    }

    // sigma and nu: monotone and submodular over every (S, i, j).
    std::vector<std::function<double(NodeMask)>> set_functions;
    std::vector<std::string> names;
    std::vector<double> sig(full + 1);
    for (NodeMask s = 0; s <= full; ++s) sig[s] = model.sigma(s);
    set_functions.push_back([&](NodeMask s) { return sig[s]; });
    names.push_back("sigma");
    std::vector<std::vector<double>> nus;
    for (double delta : {0.5, 0.9, 1.0}) {
      std::vector<double> v(full + 1);
      DecayFunction decay = DecayFunction::exponential(delta);
      for (NodeMask s = 0; s <= full; ++s) v[s] = model.nu(s, decay);
      nus.push_back(std::move(v));
    }
    for (std::size_t i = 0; i < nus.size(); ++i) {
      set_functions.push_back([&nus, i](NodeMask s) { return nus[i][s]; });
      names.push_back(fmt("nu(delta=%.1f)", i == 0 ? 0.5 : i == 1 ? 0.9 : 1.0));
    }
    for (std::size_t fi = 0; fi < set_functions.size(); ++fi) {
      const auto& F = set_functions[fi];
      for (NodeMask s = 0; s <= full; ++s) {
        for (NodeId i = 0; i < n; ++i) {
          NodeMask bi = NodeMask{1} << i;
          if (s & bi) continue;
          check(F(s | bi) >= F(s) - eps, tag + ": " + names[fi] + " monotone");
          for (NodeId j = i + 1; j < n; ++j) {
            NodeMask bj = NodeMask{1} << j;
            if (s & bj) continue;
            check(F(s | bi) - F(s) >= F(s | bi | bj) - F(s | bj) - eps, tag + ": " + names[fi] + " submodular");
          }
        }
      }
    }
    for (NodeMask s = 0; s <= full; ++s) check(std::abs(nus[2][s] - sig[s]) <= eps, tag + ": nu(1) == sigma");

    // f: non-negative, monotone, subadditive at d in {1, 2}, k2 = 1.
    for (std::int32_t d : {1, 2}) {
      std::vector<double> fv(full + 1);
      for (NodeMask s = 0; s <= full; ++s) {
        fv[s] = model.f(s, d, 1);
        check(fv[s] >= 0.0, tag + ": f non-negative");
      }
      for (NodeMask s = 0; s <= full; ++s) {
        for (NodeId i = 0; i < n; ++i) {
          NodeMask bi = NodeMask{1} << i;
          if (!(s & bi)) check(fv[s | bi] >= fv[s] - eps, tag + ": f monotone");
        }
        // Subadditivity over pairs of disjoint-or-overlapping sets of size <= 3.
        if (std::popcount(s) > 3) continue;
        for (NodeMask t = s; t <= full; ++t) {
          if (std::popcount(t) > 3) continue;
          check(fv[s | t] <= fv[s] + fv[t] + eps, tag + ": f subadditive");
        }
      }
    }

    // f non-decreasing in d on singleton and pair first-phase sets.
    for (std::size_t k1 : {1u, 2u}) {
      oracle::for_each_subset(full, k1, [&](NodeMask s) {
        double prev = -1.0;
        for (std::int32_t d = 0; d <= static_cast<std::int32_t>(n); ++d) {
          double v = model.f(s, d, 1);
          check(v >= prev - eps, tag + ": f non-decreasing in d");
          prev = v;
        }
      });
    }

    // Two-phase dominance: best f with k1 + k2 = k beats the best k-seed spread.
    for (std::size_t k : {2u, 3u}) {
      double single = model.best_sigma(k);
      for (std::size_t k1 = 1; k1 < k; ++k1) {
        for (std::int32_t d : {1, 2, 4}) {
          check(model.best_f(k1, d, k - k1) >= single - eps, tag + ": two-phase dominance");
        }
      }
    }

    // Replicate-level identity: decay 1 scores every replicate as its count.
    MonteCarloConfig mc;
    mc.master_seed = gi;
    std::vector<NodeId> seeds{0, 1};
    SpreadEstimate a = estimate_spread(g, seeds, mc, 2000);
    SpreadEstimate b = estimate_temporal_spread(g, seeds, DecayFunction::exponential(1.0), mc, 2000);
    check(a.mean == b.mean && a.std_error == b.std_error, tag + ": nu == sigma per replicate");
  }
  std::string detail = fmt("%zu checks, %zu violations", checks, violations);
  if (violations) detail += "; first: " + first;
  return {violations == 0, detail};
}

Verdict criterion5() {
  const std::int32_t d = 1;
  const std::size_t k2 = 1;
  const std::size_t instances = 50;
  double rho_sum = 0.0;
  std::size_t agree = 0;
  double rho_min = 1.0;
  for (std::uint64_t gi = 0; gi < instances; ++gi) {
    InfluenceGraph g = small_instance(5000 + gi);
    TwoPhaseConfig c;
    c.mc.phase1_sims = 200;
    c.mc.phase2_sims = 50;
    c.mc.master_seed = 77 + gi;
    c.selector.objective_sims = 200;
    c.keep_s2_examples = 0;
    std::vector<std::vector<NodeId>> sets = testutil::subsets(g.num_nodes(), 1);
    for (auto& s : testutil::subsets(g.num_nodes(), 2)) sets.push_back(s);
    std::vector<double> gv, hv;
    std::vector<SpreadEstimate> ge;
    for (const auto& s : sets) {
      ge.push_back(eval_g(g, s, d, k2, c));
      gv.push_back(ge.back().mean);
      hv.push_back(eval_h(g, s, d, k2, c).mean);
    }
    double rho = testutil::spearman(gv, hv);
    rho_sum += rho;
    rho_min = std::min(rho_min, rho);
    std::size_t ah = std::max_element(hv.begin(), hv.end()) - hv.begin();
    std::size_t ag = std::max_element(gv.begin(), gv.end()) - gv.begin();
    // The h-argmax agrees when it is g's argmax or statistically tied with it.
    double pooled = std::hypot(ge[ah].std_error, ge[ag].std_error);
    agree += ah == ag || gv[ah] >= gv[ag] - pooled;
  }
  double mean_rho = rho_sum / static_cast<double>(instances);
  double share = static_cast<double>(agree) / static_cast<double>(instances);
  return {mean_rho >= 0.9 && share >= 0.8,
          fmt("mean Spearman %.3f (min %.3f) over %zu instances; argmax agreement %.0f%%", mean_rho, rho_min,
              instances, 100.0 * share)};
}

Verdict criterion6() {
  InfluenceGraph g = example1_graph();
  GddState state(g);
  bool hand = std::abs(state.score(1) - 2.7) < 1e-12 && std::abs(state.score(0) - 1.5) < 1e-12;
  state.select(1);
  hand = hand && std::abs(state.score(2) - 0.2) < 1e-12 && std::abs(state.score(3) - 0.1) < 1e-12;

  std::size_t agree = 0, bound_ok = 0;
  for (std::uint64_t gi = 0; gi < 100; ++gi) {
    InfluenceGraph r = testutil::random_graph(9000 + gi, 30, 90);
    agree += select_gdd(r, 1).nodes == select_wd(r, 1).nodes;
    GddStats stats;
    const std::size_t k = 5;
    select_gdd(r, k, {}, &stats);
    bound_ok += stats.edge_touches <= k * r.num_nodes() * r.max_degree();
  }
  return {hand && agree == 100 && bound_ok == 100,
          fmt("hand values %s; first-pick agreement %zu/100; operation bound held %zu/100", hand ? "match" : "DIFFER",
              agree, bound_ok)};
}

Verdict criterion7() {
  std::size_t hits = 0;
  for (std::uint64_t gi = 0; gi < 20; ++gi) {
    InfluenceGraph g = testutil::random_graph(7000 + gi, 10, 14);
    oracle::ExactModel model(g);
    SetObjective objective = [&model](std::span<const NodeId> s) {
      return SpreadEstimate{model.sigma(oracle::to_mask(s)), 0.0, 1};
    };
    // Exhaustive optimum from the independent enumerator.
    double best = 0.0;
    for (const auto& s : testutil::subsets(10, 2)) best = std::max(best, testutil::naive_sigma(g, s));
    CeConfig c = CeConfig::defaults_for(10);
    c.seed = gi;
    FaceResult r = face_select(g, 2, objective, c);
    hits += r.value >= best - 1e-9;
  }

  InfluenceGraph g = example1_graph();
  oracle::ExactModel model(g);
  const std::size_t k = 2;
  const std::int32_t D = 3;
  double optimum = 0.0;
  for (std::int32_t d = 0; d <= D; ++d) {
    for (std::size_t k1 = 1; k1 <= k; ++k1) {
      if (d == 0 && k1 != k) continue;
      for (const auto& s : testutil::subsets(4, k1)) optimum = std::max(optimum, testutil::naive_f(g, s, d, k - k1));
    }
  }
  PlanObjective plan = [&model, k](std::size_t k1, std::int32_t d, std::span<const NodeId> s1) {
    return SpreadEstimate{model.f(oracle::to_mask(s1), d, k - k1), 0.0, 1};
  };
  std::size_t joint_hits = 0;
  for (std::uint64_t run = 0; run < 20; ++run) {
    CeConfig c = CeConfig::defaults_for(4);
    c.seed = 100 + run;
    JointResult r = face_joint_optimize(g, k, D, plan, c);
    joint_hits += r.value >= optimum - 1e-6;
  }
  return {hits >= 18 && joint_hits >= 18,
          fmt("face_select optimal in %zu/20; joint optimum %.4g reached in %zu/20", hits, optimum, joint_hits)};
}

Verdict criterion8() {
  const std::string lm = TWOPHASE_TEST_DATA_DIR "/lesmis.txt";
  const std::string native = (g_out / "lesmis_wc.bin").string();
  json t = run_command("transform", {{"input", lm}, {"model", "wc"}, {"output", native}});
  bool shape = t.at("nodes") == 77 && t.at("edges") == 508;

  json greedy = run_command("select", {{"graph", native}, {"algorithm", "greedy"}, {"k", 6}, {"seed", 8},
                                       {"objective_sims", 10000}});
  json gdd = run_command("select", {{"graph", native}, {"algorithm", "gdd"}, {"k", 6}, {"seed", 8}});
  json two = run_command("twophase", {{"graph", native}, {"algorithm", "gdd"}, {"k1", 3}, {"k2", 3}, {"d", "auto"},
                                      {"seed", 8}});
  double g1 = greedy.at("spread").get<double>();
  double s1 = gdd.at("spread").get<double>();
  double s2 = two.at("spread").get<double>();
  double gain = (s2 - s1) / s1;
  bool greedy_ok = std::abs(g1 - 46.2) <= 1.5;
  bool gain_ok = gain >= 0.04 && gain <= 0.12;
  return {shape && greedy_ok && gain_ok,
          fmt("graph %s; greedy single phase %.2f (target 46.2 +- 1.5: %s); GDD %.2f -> two-phase %.2f at d=D=%d, "
              "gain %.1f%% (target 4-12%%: %s)",
              shape ? "77/508" : "WRONG SHAPE", g1, greedy_ok ? "ok" : "out of range", s1, s2,
              two.at("plan").at("d").get<int>(), 100.0 * gain, gain_ok ? "ok" : "out of range")};
}

Verdict criterion9() {
  std::size_t close = 0, horizon_ok = 0, horizon_checks = 0;
  double worst_gap = 0.0;
  for (std::uint64_t gi = 0; gi < 10; ++gi) {
    InfluenceGraph g = testutil::random_graph(3000 + gi, 7, 10);
    oracle::ExactModel model(g);
    SearchConfig c;
    c.k_total = 4;
    c.k1_grid_step = 1;
    c.d_max = 4;
    c.decay = DecayFunction::exponential(0.8);
    PlanEvaluator eval = oracle_evaluator(model, c.k_total, c.decay);
    GridResult grid = exhaustive_grid(c, eval);
    ScheduleResult golden = golden_section_k1(c, eval);
    double gap = (grid.best_value.mean - golden.value.mean) / grid.best_value.mean;
    worst_gap = std::max(worst_gap, gap);
    close += gap <= 0.01;

    SearchConfig flat = c;
    flat.decay = DecayFunction::constant_one();
    ScheduleResult r = golden_section_k1(flat, oracle_evaluator(model, c.k_total, flat.decay));
    for (const GridEntry& e : r.probes) {
      if (e.k1 >= flat.k_total) continue;
      ++horizon_checks;
      horizon_ok += e.d == flat.d_max;
    }
    horizon_ok += (r.k1 < flat.k_total) ? (r.d == flat.d_max) : (r.d == 0);
    ++horizon_checks;
  }

  std::size_t synthetic_ok = 0, synthetic = 0;
  {
    SearchConfig c;
    c.k_total = 10;
    c.k1_grid_step = 1;
    c.d_max = 0;
    c.decay = DecayFunction::exponential(0.9);
    ScheduleResult r = golden_section_k1(c, [](std::size_t k1, std::int32_t) {
      double x = static_cast<double>(k1) - 3.0;
      return SpreadEstimate{-x * x, 0.0, 1};
    });
    ++synthetic;
    synthetic_ok += r.k1 == 3;
  }
  for (std::size_t p = 0; p <= 12; p += 3) {
    for (std::int32_t q = 0; q <= 6; q += 2) {
      SearchConfig c;
      c.k_total = 12;
      c.k1_grid_step = 1;
      c.d_max = 8;
      c.decay = DecayFunction::exponential(0.9);
      auto peak = [p, q](std::size_t k1, std::int32_t d) {
        double x = static_cast<double>(k1) - static_cast<double>(p);
        double y = static_cast<double>(d - q);
        return SpreadEstimate{100.0 - x * x - y * y, 0.0, 1};
      };
      ScheduleResult r = golden_section_k1(c, peak);
      // Brute force over the feasible grid; k1 = k forces d = 0.
      std::size_t best_k1 = 0;
      std::int32_t best_d = 0;
      double best = -1e300;
      for (std::size_t k1 = 0; k1 <= c.k_total; ++k1) {
        for (std::int32_t d = 0; d <= (k1 == c.k_total ? 0 : c.d_max); ++d) {
          if (peak(k1, d).mean > best) {
            best = peak(k1, d).mean;
            best_k1 = k1;
            best_d = d;
          }
        }
      }
      ++synthetic;
      synthetic_ok += r.k1 == best_k1 && r.d == best_d;
    }
  }
  return {close == 10 && horizon_ok == horizon_checks && synthetic_ok == synthetic,
          fmt("golden within 1%% of exhaustive on %zu/10 (worst gap %.3f%%); d=D under no decay %zu/%zu; "
              "synthetic optima recovered %zu/%zu",
              close, 100.0 * worst_gap, horizon_ok, horizon_checks, synthetic_ok, synthetic)};
}

Verdict criterion10() {
  std::size_t ok = 0;
  std::string first;
  for (const auto& path : g_records) {
    try {
      ex::RerunReport rep = ex::rerun_record(ex::read_record(path));
      if (rep.matches) {
        ++ok;
      } else if (first.empty()) {
        first = path.filename().string() + ": " + rep.differences.front();
      }
    } catch (const std::exception& e) {
      if (first.empty()) first = path.filename().string() + ": " + e.what();
    }
  }
  std::string detail = fmt("%zu/%zu records rerun bit-exactly", ok, g_records.size());
  if (!first.empty()) detail += "; first mismatch: " + first;
  return {!g_records.empty() && ok == g_records.size(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string out = "acceptance_runs";
  std::vector<int> only;
  std::vector<int> expect_fail;
  app.add_option("--out", out, "Directory for run records");
  app.add_option("--only", only, "Run only these criteria");
  app.add_option("--expect-fail", expect_fail,
                 "Criteria known to fail; exit status is 0 only if exactly these fail");
  CLI11_PARSE(app, argc, argv);
  g_out = out;
  std::filesystem::remove_all(g_out);
  std::filesystem::create_directories(g_out);

  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;  // 0: no runtime requirement
    Verdict (*run)();
  };
  const Criterion criteria[] = {
      {1, "Example-1 exact objective", 1.0, criterion1},
      {2, "Property-2 witness suite", 1.0, criterion2},
      {3, "Monte-Carlo/oracle agreement", 300.0, criterion3},
      {4, "Oracle property suite", 600.0, criterion4},
      {5, "h-as-proxy validation", 600.0, criterion5},
      {6, "GDD identities", 0.0, criterion6},
      {7, "FACE correctness at desk scale", 300.0, criterion7},
      {8, "LM-scale gains", 900.0, criterion8},
      {9, "Scheduler consistency", 0.0, criterion9},
      {10, "Reproducibility", 0.0, criterion10},
  };

  std::vector<int> failed;
  for (const Criterion& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0.0 && secs > c.limit_seconds) {
      v.pass = false;
      v.detail += fmt("; runtime %.1fs exceeds %.0fs", secs, c.limit_seconds);
    }
    std::printf("%s criterion %d (%s): %s [%.2fs]\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), secs);
    std::fflush(stdout);
    if (!v.pass) failed.push_back(c.id);
  }
  std::vector<int> expected;
  for (int id : expect_fail) {
    if (only.empty() || std::find(only.begin(), only.end(), id) != only.end()) expected.push_back(id);
  }
  std::sort(expected.begin(), expected.end());
  if (!expected.empty()) {
    std::string list;
    for (int id : expected) list += (list.empty() ? "" : ", ") + std::to_string(id);
    std::printf("expected failures: %s (%s)\n", list.c_str(), failed == expected ? "as recorded" : "MISMATCH");
  }
  return failed == expected ? 0 : 1;
}
