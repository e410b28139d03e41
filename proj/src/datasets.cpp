#include <algorithm>
#include <cctype>
#include <fstream>

#include <httplib.h>

#include "twophase/experiment.hpp"

namespace twophase::experiment {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

std::string fetch_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw UsageError("not a URL: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  std::string origin = url.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(origin);
  client.set_follow_location(true);
  client.set_connection_timeout(30);
  client.set_read_timeout(300);
  auto res = client.Get(path);
  if (!res) throw Error("download of " + url + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw Error("download of " + url + " failed with HTTP " + std::to_string(res->status));
  return res->body;
}

void fetch_dataset(const std::string& url, const std::string& sha256, const std::filesystem::path& dest) {
  std::string body = fetch_url(url);
  std::string got = sha256_hex(body);
  if (got != lower(sha256)) {
    throw Error("checksum mismatch for " + url + ": expected " + lower(sha256) + ", got " + got);
  }
  if (dest.has_parent_path()) std::filesystem::create_directories(dest.parent_path());
  auto partial = dest;
  partial += ".partial";
  {
    std::ofstream out(partial, std::ios::binary);
    if (!out) throw Error("cannot write " + partial.string());
    out << body;
  }
  std::filesystem::rename(partial, dest);
}

bool verify_dataset(const std::filesystem::path& path, const std::string& sha256) {
  return file_sha256(path) == lower(sha256);
}

}  // namespace twophase::experiment
