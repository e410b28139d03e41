#include "twophase/experiment.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include <openssl/evp.h>

#include "twophase/cross_entropy.hpp"
#include "twophase/oracle.hpp"
#include "twophase/schedule.hpp"
#include "twophase/two_phase.hpp"

namespace twophase::experiment {

namespace {

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, end);
}

template <typename T>
T required(const json& args, const char* key) {
  if (!args.contains(key)) throw UsageError(std::string("missing argument '") + key + "'");
  try {
    return args.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError(std::string("argument '") + key + "' has the wrong type");
  }
}

template <typename T>
T optional_arg(const json& args, const char* key, T fallback) {
  if (!args.contains(key) || args.at(key).is_null()) return fallback;
  try {
    return args.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError(std::string("argument '") + key + "' has the wrong type");
  }
}

std::string example1_bytes() {
  std::ostringstream out;
  save_native(example1_graph(), out);
  return out.str();
}

std::string graph_hash_of(const json& args) {
  const auto source = required<std::string>(args, "graph");
  if (source == "example1") return sha256_hex(example1_bytes());
  return file_sha256(source);
}

json labels_of(const InfluenceGraph& graph, std::span<const NodeId> ids) {
  json out = json::array();
  for (NodeId v : ids) out.push_back(graph.label(v));
  return out;
}

std::vector<NodeId> nodes_arg(const InfluenceGraph& graph, const json& args, const char* key) {
  auto labels = optional_arg<std::vector<std::string>>(args, key, {});
  return resolve_labels(graph, labels);
}

DecayFunction decay_arg(const json& args) {
  double delta = optional_arg<double>(args, "delta", 1.0);
  if (delta == 1.0) return DecayFunction::constant_one();
  try {
    return DecayFunction::exponential(delta);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

TwoPhaseConfig config_arg(const json& args) {
  const auto seed = required<std::uint64_t>(args, "seed");
  TwoPhaseConfig c;
  c.mc.master_seed = seed;
  c.mc.single_phase_sims = optional_arg<std::size_t>(args, "sims", 10000);
  c.mc.phase1_sims = optional_arg<std::size_t>(args, "phase1_sims", 1000);
  c.mc.phase2_sims = optional_arg<std::size_t>(args, "phase2_sims", 1000);
  c.decay = decay_arg(args);
  c.selector.objective_sims = optional_arg<std::size_t>(args, "objective_sims", 1000);
  c.selector.rmax_samples = optional_arg<std::size_t>(args, "rmax_samples", 0);
  c.selector.spic_permutations = optional_arg<std::size_t>(args, "spic_permutations", 0);
  c.selector.seed = derive_seed(seed, StreamTag::objective, 1);
  c.farsighted_phase1_sims = optional_arg<std::size_t>(args, "farsighted_phase1_sims", 50);
  c.farsighted_phase2_sims = optional_arg<std::size_t>(args, "farsighted_phase2_sims", 50);
  try {
    c.mc.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return c;
}

Algorithm algorithm_arg(const json& args, const char* key, const char* fallback) {
  try {
    return parse_algorithm(optional_arg<std::string>(args, key, fallback));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

CsvFile progression_csv(const TwoPhaseResult& r) {
  std::string s = "t,new_activations_mean,stderr\n";
  for (std::size_t t = 0; t < r.progression.size(); ++t) {
    s += std::to_string(t) + "," + format_double(r.progression[t]) + "," + format_double(r.progression_stderr[t]) +
         "\n";
  }
  return {"progression", s};
}

void put_spread(json& out, const SpreadEstimate& e) {
  out["spread"] = e.mean;
  out["stderr"] = e.std_error;
  out["samples"] = e.samples;
}

Outcome cmd_transform(const json& args) {
  const auto input = required<std::string>(args, "input");
  const auto model = optional_arg<std::string>(args, "model", "wc");
  const auto output = required<std::string>(args, "output");
  const auto format = optional_arg<std::string>(args, "format", "native");
  Outcome out;
  out.graph_hash = file_sha256(input);
  InfluenceGraph graph;
  BuildReport report;
  if (model == "wc") {
    graph = apply_wc_transform(load_edge_list(input, false));
  } else if (model == "tv") {
    graph = apply_tv_transform(load_edge_list(input, false), required<std::uint64_t>(args, "seed"));
  } else if (model == "none") {
    graph = build_graph(load_edge_list(input, !optional_arg<bool>(args, "undirected", false)), &report);
  } else {
    throw UsageError("unknown probability model '" + model + "' (expected wc, tv or none)");
  }
  std::ostringstream bytes;
  if (format == "native") {
    save_native(graph, bytes);
  } else if (format == "edgelist") {
    save_edge_list(graph, bytes);
  } else {
    throw UsageError("unknown output format '" + format + "'");
  }
  std::ofstream file(output, std::ios::binary);
  if (!file) throw Error("cannot write " + output);
  file << bytes.str();
  out.results = {{"nodes", graph.num_nodes()},
                 {"edges", graph.num_edges()},
                 {"self_loops_dropped", report.self_loops_dropped},
                 {"output_sha256", sha256_hex(bytes.str())}};
  return out;
}

Outcome cmd_select(const json& args) {
  LoadedGraph g = load_graph(args);
  TwoPhaseConfig config = config_arg(args);
  TwoPhasePlan plan;
  plan.k1 = required<std::size_t>(args, "k");
  plan.first = algorithm_arg(args, "algorithm", "gdd");
  if (plan.k1 > g.graph.num_nodes()) throw UsageError("budget exceeds node count");
  TwoPhaseResult r = run_two_phase(g.graph, plan, config);
  Outcome out;
  out.graph_hash = g.hash;
  out.results = {{"algorithm", to_string(plan.first)}, {"k", plan.k1}};
  out.results["seeds"] = labels_of(g.graph, r.s1);
  out.results["seed_ids"] = r.s1;
  put_spread(out.results, r.spread);
  out.results["progression"] = r.progression;
  out.csv.push_back(progression_csv(r));
  return out;
}

Outcome cmd_twophase(const json& args) {
  LoadedGraph g = load_graph(args);
  const InfluenceGraph& graph = g.graph;
  const std::size_t n = graph.num_nodes();
  TwoPhaseConfig config = config_arg(args);
  const auto optimize = optional_arg<std::string>(args, "optimize", "none");

  TwoPhasePlan plan;
  plan.first = algorithm_arg(args, "algorithm", "gdd");
  plan.second = algorithm_arg(args, "second_algorithm", to_string(plan.first).data());
  try {
    plan.mode = parse_mode(optional_arg<std::string>(args, "mode", "myopic"));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  std::size_t k = 0;
  if (args.contains("k")) {
    k = required<std::size_t>(args, "k");
  } else if (args.contains("k1") && args.contains("k2")) {
    k = required<std::size_t>(args, "k1") + required<std::size_t>(args, "k2");
  } else {
    throw UsageError("give --k, or both --k1 and --k2");
  }
  if (k > n) throw UsageError("budget exceeds node count");

  std::int32_t d_max = 0;
  const json d_max_arg = args.value("d_max", json("auto"));
  if (d_max_arg.is_string()) {
    if (d_max_arg.get<std::string>() != "auto") throw UsageError("--d-max takes an integer or 'auto'");
    d_max = estimate_D(graph, k, config.mc, optional_arg<std::int32_t>(args, "d_margin", 2));
  } else {
    d_max = d_max_arg.get<std::int32_t>();
  }

  Outcome out;
  out.graph_hash = g.hash;
  json& res = out.results;
  TwoPhaseResult result;

  if (optimize == "none") {
    plan.k1 = required<std::size_t>(args, "k1");
    plan.k2 = optional_arg<std::size_t>(args, "k2", k >= plan.k1 ? k - plan.k1 : 0);
    if (plan.k1 + plan.k2 != k) throw UsageError("k1 + k2 must equal k");
    const json d_arg = args.value("d", json("auto"));
    if (d_arg.is_string()) {
      if (d_arg.get<std::string>() != "auto") throw UsageError("--d takes an integer or 'auto'");
      plan.d = d_max;
    } else {
      plan.d = d_arg.get<std::int32_t>();
    }
    try {
      plan.validate(n);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    result = run_two_phase(graph, plan, config);
  } else if (optimize == "golden" || optimize == "exhaustive") {
    SearchConfig search;
    search.k_total = k;
    search.d_max = d_max;
    search.decay = config.decay;
    search.k1_grid_step = optional_arg<std::size_t>(args, "k1_step", 0);
    search.patience = optional_arg<std::size_t>(args, "patience", 2);
    TwoPhaseConfig probe = config;
    probe.mc.phase1_sims = optional_arg<std::size_t>(args, "search_phase1_sims", config.mc.phase1_sims);
    probe.mc.phase2_sims = optional_arg<std::size_t>(args, "search_phase2_sims", config.mc.phase2_sims);
    probe.mc.single_phase_sims = optional_arg<std::size_t>(args, "search_sims", config.mc.single_phase_sims);
    probe.keep_s2_examples = 0;
    PlanEvaluator evaluate = pipeline_evaluator(graph, k, plan, probe);
    std::vector<GridEntry> entries;
    if (optimize == "golden") {
      ScheduleResult s = golden_section_k1(search, evaluate);
      plan.k1 = s.k1;
      plan.d = s.d;
      entries = s.probes;
    } else {
      GridResult grid = exhaustive_grid(search, evaluate);
      plan.k1 = grid.best_k1;
      plan.d = grid.best_d;
      entries = grid.entries;
    }
    plan.k2 = k - plan.k1;
    json rows = json::array();
    std::string csv = "k1,d,mean,stderr\n";
    for (const GridEntry& e : entries) {
      rows.push_back({{"k1", e.k1}, {"d", e.d}, {"mean", e.value.mean}, {"stderr", e.value.std_error}});
      csv += std::to_string(e.k1) + "," + std::to_string(e.d) + "," + format_double(e.value.mean) + "," +
             format_double(e.value.std_error) + "\n";
    }
    res["grid"] = rows;
    out.csv.push_back({"grid", csv});
    result = run_two_phase(graph, plan, config);
  } else if (optimize == "face-joint") {
    if (k == 0) throw UsageError("joint optimization needs a positive budget");
    CeConfig ce = CeConfig::defaults_for(n);
    ce.seed = derive_seed(config.mc.master_seed, StreamTag::cross_entropy, 0);
    TwoPhaseConfig probe = config;
    probe.mc.phase1_sims = config.farsighted_phase1_sims;
    probe.mc.phase2_sims = config.farsighted_phase2_sims;
    probe.keep_s2_examples = 0;
    PlanObjective objective = [&](std::size_t k1, std::int32_t d, std::span<const NodeId> s1) {
      return two_phase_spread(graph, s1, d, k - k1, probe, plan.second).spread;
    };
    JointResult joint = face_joint_optimize(graph, k, std::max(d_max, 1), objective, ce);
    plan.k1 = joint.k1;
    plan.k2 = k - joint.k1;
    plan.d = joint.d;
    if (plan.k2 == 0 && plan.d == 0) {
      result.spread = config.decay.is_constant_one()
                          ? estimate_spread(graph, joint.seeds.nodes, config.mc, config.mc.single_phase_sims)
                          : estimate_temporal_spread(graph, joint.seeds.nodes, config.decay, config.mc,
                                                     config.mc.single_phase_sims);
      result.s1 = joint.seeds.nodes;
    } else {
      result = two_phase_spread(graph, joint.seeds.nodes, plan.d, plan.k2, config, plan.second);
    }
    json log = json::array();
    std::string csv = "iter,draws,elite_threshold,best\n";
    for (const CeIterationLog& l : joint.log) {
      log.push_back({{"iter", l.iteration}, {"draws", l.draws}, {"elite_threshold", l.elite_threshold},
                     {"best", l.best}});
      csv += std::to_string(l.iteration) + "," + std::to_string(l.draws) + "," + format_double(l.elite_threshold) +
             "," + format_double(l.best) + "\n";
    }
    res["face_log"] = log;
    res["face_search_value"] = joint.value;
    out.csv.push_back({"face_log", csv});
  } else {
    throw UsageError("unknown optimizer '" + optimize + "' (expected none, golden, exhaustive or face-joint)");
  }

  res["plan"] = {{"k", k},
                 {"k1", plan.k1},
                 {"k2", plan.k2},
                 {"d", plan.d},
                 {"D", d_max},
                 {"mode", to_string(plan.mode)},
                 {"algorithm", to_string(plan.first)},
                 {"second_algorithm", to_string(plan.second)},
                 {"optimize", optimize}};
  res["s1"] = labels_of(graph, result.s1);
  res["s1_ids"] = result.s1;
  put_spread(res, result.spread);
  res["progression"] = result.progression;
  json examples = json::array();
  for (const SecondPhaseExample& e : result.realized_s2_examples) {
    examples.push_back({{"replicate", e.replicate},
                        {"already", e.already},
                        {"recent", labels_of(graph, e.recent)},
                        {"s2", labels_of(graph, e.s2)}});
  }
  res["s2_examples"] = examples;
  if (!result.progression.empty()) out.csv.push_back(progression_csv(result));
  return out;
}

Outcome cmd_oracle(const json& args) {
  LoadedGraph g = load_graph(args);
  const InfluenceGraph& graph = g.graph;
  const auto query = required<std::string>(args, "query");
  const DecayFunction decay = decay_arg(args);
  oracle::ExactModel model(graph);
  Outcome out;
  out.graph_hash = g.hash;
  json& res = out.results;
  res["query"] = query;
  if (query == "f") {
    auto s1 = nodes_arg(graph, args, "s1");
    res["value"] = model.f(oracle::to_mask(s1), required<std::int32_t>(args, "d"), required<std::size_t>(args, "k2"),
                           decay);
    res["s1"] = labels_of(graph, s1);
  } else if (query == "sigma" || query == "nu") {
    auto seeds = nodes_arg(graph, args, "seeds");
    res["value"] = query == "sigma" ? model.sigma(oracle::to_mask(seeds)) : model.nu(oracle::to_mask(seeds), decay);
    res["seeds"] = labels_of(graph, seeds);
  } else if (query == "best_f" || query == "best_sigma") {
    oracle::NodeMask argmax = 0;
    if (query == "best_f") {
      res["value"] = model.best_f(required<std::size_t>(args, "k1"), required<std::int32_t>(args, "d"),
                                  required<std::size_t>(args, "k2"), decay, &argmax);
    } else {
      res["value"] = model.best_sigma(required<std::size_t>(args, "k"), &argmax);
    }
    res["argmax"] = labels_of(graph, oracle::from_mask(argmax));
  } else {
    throw UsageError("unknown oracle query '" + query + "' (expected f, sigma, nu, best_f or best_sigma)");
  }
  return out;
}

Outcome cmd_simulate(const json& args) {
  LoadedGraph g = load_graph(args);
  auto seeds = nodes_arg(g.graph, args, "seeds");
  SplitMix64 rng = make_stream(required<std::uint64_t>(args, "seed"), StreamTag::single_phase, 0);
  std::optional<std::int32_t> stop;
  if (args.contains("stop") && !args.at("stop").is_null()) stop = required<std::int32_t>(args, "stop");
  DiffusionTrace trace = simulate_ic(g.graph, seeds, rng, stop);
  Outcome out;
  out.graph_hash = g.hash;
  out.results = {{"final_active_count", trace.final_active_count}, {"new_per_step", trace.new_per_step()}};
  std::string csv = "node_id,activation_time\n";
  for (NodeId v = 0; v < g.graph.num_nodes(); ++v) {
    csv += g.graph.label(v) + "," + std::to_string(trace.activation_time[v]) + "\n";
  }
  out.csv.push_back({"trace", csv});
  return out;
}

// Flattens a JSON patch into "op path: old -> new" lines.
std::vector<std::string> describe_diff(const json& recorded, const json& fresh) {
  std::vector<std::string> lines;
  for (const json& op : json::diff(recorded, fresh)) {
    const std::string path = op.at("path").get<std::string>();
    std::string line = op.at("op").get<std::string>() + " " + path;
    json::json_pointer ptr(path);
    if (recorded.contains(ptr)) line += ": recorded " + recorded.at(ptr).dump();
    if (fresh.contains(ptr)) line += ", rerun " + fresh.at(ptr).dump();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string file_sha256(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

LoadedGraph load_graph(const json& args) {
  const auto source = required<std::string>(args, "graph");
  LoadedGraph g;
  if (source == "example1") {
    g.graph = example1_graph();
    g.hash = sha256_hex(example1_bytes());
    return g;
  }
  g.hash = file_sha256(source);
  if (is_native_file(source)) {
    g.graph = load_native(std::filesystem::path(source));
    return g;
  }
  const auto transform = optional_arg<std::string>(args, "transform", "none");
  if (transform == "wc") {
    g.graph = apply_wc_transform(load_edge_list(source, false));
  } else if (transform == "tv") {
    g.graph = apply_tv_transform(load_edge_list(source, false), optional_arg<std::uint64_t>(args, "tv_seed", 0));
  } else if (transform == "none") {
    g.graph = build_graph(load_edge_list(source, !optional_arg<bool>(args, "undirected", false)));
  } else {
    throw UsageError("unknown transform '" + transform + "' (expected none, wc or tv)");
  }
  return g;
}

// Checks another record. Its "graph" input is the record file itself.
Outcome cmd_rerun(const json& args) {
  const auto path = required<std::string>(args, "record");
  RerunReport report = rerun_record(read_record(path));
  Outcome out;
  out.graph_hash = file_sha256(path);
  out.results = {{"record", path}, {"matches", report.matches}, {"differences", report.differences}};
  return out;
}

Outcome execute(std::string_view command, const json& args) {
  if (!args.is_object()) throw UsageError("arguments must be a JSON object");
  if (command == "rerun") return cmd_rerun(args);
  if (command == "transform") return cmd_transform(args);
  if (command == "select") return cmd_select(args);
  if (command == "twophase") return cmd_twophase(args);
  if (command == "oracle") return cmd_oracle(args);
  if (command == "simulate") return cmd_simulate(args);
  throw UsageError("unknown command '" + std::string(command) + "'");
}

json make_record(std::string_view command, const json& args, const Outcome& outcome, double wall_seconds) {
  json record;
  record["version"] = kRecordVersion;
  record["command"] = command;
  record["args"] = args;
  record["graph_hash"] = outcome.graph_hash;
  record["master_seed"] = args.value("seed", json(nullptr));
  record["results"] = outcome.results;
  record["wall_time_seconds"] = wall_seconds;
  return record;
}

std::filesystem::path write_record(const std::filesystem::path& dir, const std::string& stem, const json& record,
                                   const std::vector<CsvFile>& csv) {
  std::filesystem::create_directories(dir);
  const auto path = dir / (stem + ".json");
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << record.dump(2) << "\n";
  for (const CsvFile& f : csv) {
    std::ofstream c(dir / (stem + "." + f.name + ".csv"));
    if (!c) throw Error("cannot write CSV for " + stem);
    c << f.content;
  }
  return path;
}

json read_record(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(path.string() + ": not a valid record (" + e.what() + ")");
  }
}

RerunReport rerun_record(const json& record) {
  if (!record.is_object() || !record.contains("version") || !record.contains("command") ||
      !record.contains("args") || !record.contains("results")) {
    throw Error("record is missing required fields");
  }
  if (record.at("version") != kRecordVersion) {
    throw Error("record version " + record.at("version").dump() + " is not supported (expected " +
                std::to_string(kRecordVersion) + ")");
  }
  const auto command = record.at("command").get<std::string>();
  json args = record.at("args");
  const auto recorded_hash = record.value("graph_hash", std::string());
  if (!recorded_hash.empty()) {
    std::string now = command == "transform" ? file_sha256(required<std::string>(args, "input"))
                      : command == "rerun"   ? file_sha256(required<std::string>(args, "record"))
                                             : graph_hash_of(args);
    if (now != recorded_hash) {
      throw ReproducibilityError("graph input changed since the record was made (recorded sha256 " +
                                 recorded_hash + ", now " + now + "); refusing to rerun");
    }
  }

  std::filesystem::path scratch;
  if (command == "transform") {
    scratch = std::filesystem::temp_directory_path() /
              ("twophase-rerun-" + std::to_string(::getpid()) + "-" + recorded_hash.substr(0, 12));
    args["output"] = scratch.string();
  }
  Outcome fresh = execute(command, args);
  if (!scratch.empty()) std::filesystem::remove(scratch);

  RerunReport report;
  report.differences = describe_diff(record.at("results"), fresh.results);
  report.matches = report.differences.empty();
  return report;
}

DirLock::DirLock(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  path_ = dir / ".twophase.lock";
  std::FILE* f = std::fopen(path_.c_str(), "wx");
  if (f == nullptr) {
    const auto held = path_;
    path_.clear();
    throw UsageError("output directory is in use by another run (lock file " + held.string() + ")");
  }
  std::fprintf(f, "%d\n", static_cast<int>(::getpid()));
  std::fclose(f);
}

DirLock::~DirLock() {
  if (!path_.empty()) {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
}

}  // namespace twophase::experiment
