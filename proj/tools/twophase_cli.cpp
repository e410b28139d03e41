// twophase: command-line front end for seed selection, two-phase planning,
// exact small-graph queries and reproducible run records.

#include <chrono>
#include <ctime>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <random>

#include <omp.h>

#include <CLI11.hpp>

#include "twophase/experiment.hpp"

namespace ex = twophase::experiment;
using ex::json;

namespace {

// Options that were actually given are copied into the args object; every
// default lives in the command layer so records stay minimal.
class ArgSink {
 public:
  template <typename T>
  CLI::Option* add(CLI::App* app, const std::string& flags, const std::string& key, const std::string& help) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(flags, *value, help);
    emit_[app].push_back([opt, value, key](json& j) {
      if (opt->count() > 0) j[key] = *value;
    });
    return opt;
  }

  CLI::Option* flag(CLI::App* app, const std::string& flags, const std::string& key, const std::string& help) {
    CLI::Option* opt = app->add_flag(flags, help);
    emit_[app].push_back([opt, key](json& j) {
      if (opt->count() > 0) j[key] = true;
    });
    return opt;
  }

  json collect(CLI::App* app) const {
    json j = json::object();
    auto it = emit_.find(app);
    if (it != emit_.end()) {
      for (const auto& f : it->second) f(j);
    }
    return j;
  }

 private:
  std::map<CLI::App*, std::vector<std::function<void(json&)>>> emit_;
};

// The graph may be given positionally or with -g.
void add_graph_options(CLI::App* app, ArgSink& sink) {
  sink.add<std::string>(app, "graph,--graph,-g", "graph", "example1, a native graph file or an edge list")->required();
  sink.add<std::string>(app, "--transform", "transform", "probabilities for edge lists: none, wc or tv")
      ->check(CLI::IsMember({"none", "wc", "tv"}));
  sink.flag(app, "--undirected", "undirected", "treat an edge list with probabilities as undirected");
  sink.add<std::uint64_t>(app, "--tv-seed", "tv_seed", "seed for trivalency probabilities");
}

void add_mc_options(CLI::App* app, ArgSink& sink) {
  sink.add<std::uint64_t>(app, "--seed", "seed", "master seed (generated and recorded when omitted)");
  sink.add<std::size_t>(app, "--sims", "sims", "single-phase Monte-Carlo replicates (default 10000)");
  sink.add<std::size_t>(app, "--objective-sims", "objective_sims", "replicates per selector objective query");
  sink.add<std::size_t>(app, "--rmax-samples", "rmax_samples", "RMax sampled sets (default 5n)");
  sink.add<std::size_t>(app, "--spic-permutations", "spic_permutations", "SPIC permutations (default 5n)");
  sink.add<double>(app, "--delta", "delta", "time decay factor in [0,1] (default 1, no decay)");
}

// "auto" stays a string; anything else must be an integer.
void normalize_auto(json& args, const char* key) {
  if (!args.contains(key)) return;
  const std::string s = args[key].get<std::string>();
  if (s == "auto") return;
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    args[key] = v;
  } catch (const std::exception&) {
    throw ex::UsageError(std::string("--") + key + " takes an integer or 'auto', got '" + s + "'");
  }
}

std::string record_stem(const std::string& command, std::uint64_t seed, const std::filesystem::path& dir) {
  std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y%m%dT%H%M%S", std::gmtime(&now));
  char tail[20];
  std::snprintf(tail, sizeof(tail), "%08llx", static_cast<unsigned long long>(seed & 0xffffffffULL));
  std::string stem = command + "-" + stamp + "-" + tail;
  std::string candidate = stem;
  for (int i = 1; std::filesystem::exists(dir / (candidate + ".json")); ++i) candidate = stem + "-" + std::to_string(i);
  return candidate;
}

int run_command(const std::string& command, json args, const std::filesystem::path& out_dir, const std::string& name,
                bool randomized) {
  if (randomized && !args.contains("seed")) {
    std::random_device rd;
    args["seed"] = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  if (args.contains("seed")) std::cerr << "master seed: " << args["seed"].get<std::uint64_t>() << "\n";

  ex::DirLock lock(out_dir);
  auto start = std::chrono::steady_clock::now();
  ex::Outcome outcome = ex::execute(command, args);
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json record = ex::make_record(command, args, outcome, wall);
  std::string stem = name.empty() ? record_stem(command, args.value("seed", std::uint64_t{0}), out_dir) : name;
  auto path = ex::write_record(out_dir, stem, record, outcome.csv);
  std::cout << outcome.results.dump(2) << "\n";
  std::cerr << "record: " << path.string() << "\n";
  if (command == "rerun" && !outcome.results.at("matches").get<bool>()) return ex::kExitReproducibility;
  return ex::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-phase influence maximization under the independent cascade model"};
  app.require_subcommand(1);
  ArgSink sink;

  int threads = 0;
  std::string out_dir = "runs";
  std::string name;
  app.add_option("--threads", threads, "cap on worker threads (default: OpenMP default)");
  app.add_option("--out", out_dir, "directory for run records and CSV files")->capture_default_str();
  app.add_option("--name", name, "record file stem (default: command-time-seed)");

  auto* transform = app.add_subcommand("transform", "assign edge probabilities and write a native graph");
  sink.add<std::string>(transform, "--input,-i", "input", "edge list")->required();
  sink.add<std::string>(transform, "--model,-m", "model", "wc, tv or none")->check(CLI::IsMember({"wc", "tv", "none"}));
  sink.add<std::string>(transform, "--output,-o", "output", "output graph file")->required();
  sink.add<std::string>(transform, "--format", "format", "native or edgelist")
      ->check(CLI::IsMember({"native", "edgelist"}));
  sink.add<std::uint64_t>(transform, "--seed", "seed", "trivalency seed");
  sink.flag(transform, "--undirected", "undirected", "with --model none: treat edges as undirected");

  auto* select = app.add_subcommand("select", "single-phase seed selection");
  add_graph_options(select, sink);
  sink.add<std::string>(select, "--algorithm,-a", "algorithm", "sd, wd, gdd, greedy, rmax, spic or face");
  sink.add<std::size_t>(select, "--k,-k", "k", "budget")->required();
  add_mc_options(select, sink);

  auto* twophase = app.add_subcommand("twophase", "two-phase plan evaluation or optimization");
  add_graph_options(twophase, sink);
  sink.add<std::string>(twophase, "--algorithm,-a", "algorithm", "first-phase selector");
  sink.add<std::string>(twophase, "--second-algorithm", "second_algorithm", "second-phase selector (default: same)");
  sink.add<std::string>(twophase, "--mode", "mode", "myopic or farsighted")
      ->check(CLI::IsMember({"myopic", "farsighted"}));
  sink.add<std::size_t>(twophase, "--k,-k", "k", "total budget");
  sink.add<std::size_t>(twophase, "--k1", "k1", "first-phase budget");
  sink.add<std::size_t>(twophase, "--k2", "k2", "second-phase budget");
  sink.add<std::string>(twophase, "--d", "d", "delay, or 'auto' for D (default)");
  sink.add<std::string>(twophase, "--d-max", "d_max", "horizon D, or 'auto' to estimate it (default)");
  sink.add<std::int32_t>(twophase, "--d-margin", "d_margin", "safety margin added to the estimated D");
  sink.add<std::string>(twophase, "--optimize", "optimize", "none, golden, exhaustive or face-joint")
      ->check(CLI::IsMember({"none", "golden", "exhaustive", "face-joint"}));
  sink.add<std::size_t>(twophase, "--phase1-sims", "phase1_sims", "outer replicates (default 1000)");
  sink.add<std::size_t>(twophase, "--phase2-sims", "phase2_sims", "inner replicates (default 1000)");
  sink.add<std::size_t>(twophase, "--farsighted-phase1-sims", "farsighted_phase1_sims", "outer replicates per h query");
  sink.add<std::size_t>(twophase, "--farsighted-phase2-sims", "farsighted_phase2_sims", "inner replicates per h query");
  sink.add<std::size_t>(twophase, "--search-phase1-sims", "search_phase1_sims", "outer replicates per grid cell");
  sink.add<std::size_t>(twophase, "--search-phase2-sims", "search_phase2_sims", "inner replicates per grid cell");
  sink.add<std::size_t>(twophase, "--search-sims", "search_sims", "single-phase replicates per grid cell");
  sink.add<std::size_t>(twophase, "--k1-step", "k1_step", "k1 grid step (default max(1, k/20))");
  sink.add<std::size_t>(twophase, "--patience", "patience", "non-improving delays before the d search stops");
  add_mc_options(twophase, sink);

  auto* oracle = app.add_subcommand("oracle", "exact values on small graphs by live-graph enumeration");
  add_graph_options(oracle, sink);
  auto* q_f = oracle->add_flag("--f", "two-phase objective f(S1) at delay d with k2 second-phase seeds");
  auto* q_sigma = oracle->add_flag("--sigma", "expected spread of --seeds");
  auto* q_nu = oracle->add_flag("--nu", "decayed spread of --seeds");
  auto* q_best_f = oracle->add_flag("--best-f", "max of f over |S1| = k1");
  auto* q_best_sigma = oracle->add_flag("--best-sigma", "max spread over |S| = k");
  sink.add<std::vector<std::string>>(oracle, "--s1", "s1", "first-phase seed labels")->delimiter(',');
  sink.add<std::vector<std::string>>(oracle, "--seeds", "seeds", "seed labels")->delimiter(',');
  sink.add<std::int32_t>(oracle, "--d", "d", "delay");
  sink.add<std::size_t>(oracle, "--k1", "k1", "first-phase budget");
  sink.add<std::size_t>(oracle, "--k2", "k2", "second-phase budget");
  sink.add<std::size_t>(oracle, "--k,-k", "k", "budget");
  sink.add<double>(oracle, "--delta", "delta", "time decay factor");

  auto* simulate = app.add_subcommand("simulate", "one diffusion trace as CSV");
  add_graph_options(simulate, sink);
  sink.add<std::vector<std::string>>(simulate, "--seeds", "seeds", "seed labels")->delimiter(',')->required();
  sink.add<std::uint64_t>(simulate, "--seed", "seed", "master seed");
  sink.add<std::int32_t>(simulate, "--stop", "stop", "stop after this step");

  auto* rerun = app.add_subcommand("rerun", "re-execute a run record and compare results bit-for-bit");
  std::string record_path;
  rerun->add_option("record", record_path, "record JSON file")->required();

  auto* datasets = app.add_subcommand("datasets", "fetch or verify external datasets");
  datasets->require_subcommand(1);
  auto* fetch = datasets->add_subcommand("fetch", "download a file and pin its SHA-256");
  std::string url, sha, dest, file;
  fetch->add_option("--url", url, "source URL")->required();
  fetch->add_option("--sha256", sha, "expected SHA-256 (hex)")->required();
  fetch->add_option("--dest", dest, "destination path")->required();
  auto* verify = datasets->add_subcommand("verify", "check a local file against a SHA-256");
  verify->add_option("--file", file, "local path")->required();
  verify->add_option("--sha256", sha, "expected SHA-256 (hex)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? ex::kExitOk : ex::kExitUsage;
  }
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (transform->parsed()) return run_command("transform", sink.collect(transform), out_dir, name, false);
    if (select->parsed()) return run_command("select", sink.collect(select), out_dir, name, true);
    if (twophase->parsed()) {
      json args = sink.collect(twophase);
      normalize_auto(args, "d");
      normalize_auto(args, "d_max");
      return run_command("twophase", args, out_dir, name, true);
    }
    if (oracle->parsed()) {
      json args = sink.collect(oracle);
      int picked = 0;
      for (auto [opt, query] : {std::pair{q_f, "f"}, std::pair{q_sigma, "sigma"}, std::pair{q_nu, "nu"},
                                std::pair{q_best_f, "best_f"}, std::pair{q_best_sigma, "best_sigma"}}) {
        if (opt->count() > 0) {
          args["query"] = query;
          ++picked;
        }
      }
      if (picked != 1) throw ex::UsageError("choose exactly one of --f, --sigma, --nu, --best-f, --best-sigma");
      return run_command("oracle", args, out_dir, name, false);
    }
    if (simulate->parsed()) return run_command("simulate", sink.collect(simulate), out_dir, name, true);
    if (rerun->parsed()) return run_command("rerun", {{"record", record_path}}, out_dir, name, false);
    if (fetch->parsed()) {
      ex::fetch_dataset(url, sha, dest);
      std::cout << "fetched " << dest << " (sha256 verified)\n";
      return ex::kExitOk;
    }
    if (verify->parsed()) {
      if (ex::verify_dataset(file, sha)) {
        std::cout << file << ": sha256 OK\n";
        return ex::kExitOk;
      }
      std::cout << file << ": sha256 MISMATCH (got " << ex::file_sha256(file) << ")\n";
      return ex::kExitData;
    }
  } catch (const ex::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ex::kExitUsage;
  } catch (const ex::ReproducibilityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ex::kExitReproducibility;
  } catch (const twophase::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ex::kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ex::kExitUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ex::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ex::kExitData;
  }
  return ex::kExitUsage;
}
