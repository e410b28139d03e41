#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "twophase/graph.hpp"

// Command layer shared by the CLI and the acceptance suite. Each command
// takes a JSON object of fully resolved arguments and returns JSON results,
// so a run record (command + args + results) can be re-executed verbatim.
namespace twophase::experiment {

using json = nlohmann::json;

inline constexpr int kRecordVersion = 1;

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitReproducibility = 3 };

class UsageError : public Error {
 public:
  using Error::Error;
};

class ReproducibilityError : public Error {
 public:
  using Error::Error;
};

struct CsvFile {
  std::string name;  // e.g. "progression"
  std::string content;
};

struct Outcome {
  json results;
  std::string graph_hash;  // empty when the command reads no graph
  std::vector<CsvFile> csv;
};

/// Commands: transform, select, twophase, oracle, simulate. `args` must
/// carry a "seed" for randomized commands.
Outcome execute(std::string_view command, const json& args);

json make_record(std::string_view command, const json& args, const Outcome& outcome, double wall_seconds);

/// Writes <dir>/<stem>.json and <dir>/<stem>.<csv name>.csv; returns the record path.
std::filesystem::path write_record(const std::filesystem::path& dir, const std::string& stem, const json& record,
                                   const std::vector<CsvFile>& csv);

struct RerunReport {
  bool matches = false;
  std::vector<std::string> differences;
};

/// Re-executes a record and compares results bit-for-bit. Throws
/// ReproducibilityError when the graph input no longer hashes the same and
/// Error on version mismatch.
RerunReport rerun_record(const json& record);
json read_record(const std::filesystem::path& path);

/// Graph named by args: "example1" or a path, with "transform" (none|wc|tv),
/// "undirected" and "tv_seed".
struct LoadedGraph {
  InfluenceGraph graph;
  std::string hash;
};
LoadedGraph load_graph(const json& args);

std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const std::filesystem::path& path);

/// Exclusive lock file in an output directory, removed on destruction.
class DirLock {
 public:
  explicit DirLock(const std::filesystem::path& dir);
  ~DirLock();
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  std::filesystem::path path_;
};

// Dataset fetching with checksum pinning.
std::string fetch_url(const std::string& url);
/// Downloads `url` to `dest` only if its SHA-256 equals `sha256`.
void fetch_dataset(const std::string& url, const std::string& sha256, const std::filesystem::path& dest);
bool verify_dataset(const std::filesystem::path& path, const std::string& sha256);

}  // namespace twophase::experiment
