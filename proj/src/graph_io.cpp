#include <array>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <sstream>

#include "twophase/graph.hpp"

namespace twophase {

namespace {

constexpr std::array<char, 8> kMagic = {'T', 'P', 'I', 'M', 'G', 'R', 'P', 'H'};

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

template <typename T>
void write_pod(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw GraphError("truncated native graph file");
  return value;
}

}  // namespace

RawEdgeList parse_edge_list(std::istream& in, bool directed) {
  RawEdgeList raw;
  raw.directed = directed;
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> arity;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_fields(line);
    if (fields.empty() || fields[0].front() == '#' || fields[0].front() == '%') continue;
    if (fields.size() != 2 && fields.size() != 3) {
      throw ParseError("expected 2 or 3 fields, found " + std::to_string(fields.size()), line_no);
    }
    if (arity && *arity != fields.size()) throw ParseError("mixed record arity", line_no);
    arity = fields.size();

    RawRecord rec{std::string(fields[0]), std::string(fields[1]), std::nullopt};
    if (fields.size() == 3) {
      double p = 0.0;
      auto [ptr, ec] = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), p);
      if (ec != std::errc() || ptr != fields[2].data() + fields[2].size()) {
        throw ParseError("bad probability '" + std::string(fields[2]) + "'", line_no);
      }
      rec.prob = p;
    }
    raw.pairs.push_back(std::move(rec));
  }
  return raw;
}

RawEdgeList load_edge_list(const std::filesystem::path& path, bool directed) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return parse_edge_list(in, directed);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

void save_native(const InfluenceGraph& graph, std::ostream& out) {
  out.write(kMagic.data(), kMagic.size());
  write_pod<std::uint32_t>(out, kNativeFormatVersion);
  write_pod<std::uint64_t>(out, graph.num_nodes());
  write_pod<std::uint64_t>(out, graph.num_edges());
  for (const std::string& l : graph.labels()) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(l.size()));
    out.write(l.data(), static_cast<std::streamsize>(l.size()));
  }
  for (const Edge& e : graph.edges()) {
    write_pod<std::uint32_t>(out, e.source);
    write_pod<std::uint32_t>(out, e.target);
    write_pod<double>(out, e.prob);
  }
}

void save_native(const InfluenceGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  save_native(graph, out);
}

InfluenceGraph load_native(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw GraphError("not a native graph file");
  auto version = read_pod<std::uint32_t>(in);
  if (version != kNativeFormatVersion) {
    throw GraphError("unsupported native graph version " + std::to_string(version));
  }
  auto n = read_pod<std::uint64_t>(in);
  auto m = read_pod<std::uint64_t>(in);
  std::vector<std::string> labels(n);
  for (auto& l : labels) {
    auto len = read_pod<std::uint32_t>(in);
    l.resize(len);
    in.read(l.data(), len);
    if (!in) throw GraphError("truncated native graph file");
  }
  std::vector<Edge> edges(m);
  for (auto& e : edges) {
    e.source = read_pod<std::uint32_t>(in);
    e.target = read_pod<std::uint32_t>(in);
    e.prob = read_pod<double>(in);
  }
  return InfluenceGraph::from_edges(n, std::move(edges), std::move(labels));
}

InfluenceGraph load_native(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return load_native(in);
}

bool is_native_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  return in && magic == kMagic;
}

void save_edge_list(const InfluenceGraph& graph, std::ostream& out) {
  auto flags = out.flags();
  auto precision = out.precision();
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const Edge& e : graph.edges()) {
    out << graph.label(e.source) << ' ' << graph.label(e.target) << ' ' << e.prob << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace twophase
