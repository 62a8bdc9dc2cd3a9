#include "artifacts.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "anntune/errors.hpp"

namespace anntune::cli {

namespace fs = std::filesystem;

void save_neighbors(const fs::path& path, const std::vector<NeighborList>& lists, std::size_t k) {
  nlohmann::json ids = nlohmann::json::array();
  nlohmann::json dists = nlohmann::json::array();
  for (const auto& nl : lists) {
    ids.push_back(nl.ids);
    dists.push_back(nl.distances);
  }
  const nlohmann::json j = {{"k", k}, {"ids", ids}, {"distances", dists}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump() << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<NeighborList> load_neighbors(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    const auto ids = j.at("ids").get<std::vector<std::vector<NodeId>>>();
    const auto dists = j.at("distances").get<std::vector<std::vector<float>>>();
    if (ids.size() != dists.size()) throw FormatError(path.string() + ": ids and distances differ in length");
    std::vector<NeighborList> out(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i].size() != dists[i].size()) {
        throw FormatError(path.string() + ": row " + std::to_string(i) + " is ragged");
      }
      out[i].ids = ids[i];
      out[i].distances = dists[i];
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

const char* const kBenchCsvHeader =
    "label,d,alpha,entry_clusters,max_degree,pool_size,k,repeats,recall_at_k,qps,memory_bytes";

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Shortest text that parses back to the same double.
std::string exact(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw FormatError("csv line " + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(cur);
  return fields;
}

template <typename T>
T parse_field(const std::string& s, std::size_t line_no, const char* column) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw FormatError("csv line " + std::to_string(line_no) + ": bad " + column + " '" + s + "'");
  }
  return v;
}

}  // namespace

std::string to_csv_line(const BenchRow& r) {
  std::ostringstream os;
  os << quote(r.label) << ',' << r.d << ',' << exact(r.alpha) << ',' << r.entry_clusters << ','
     << r.max_degree << ',' << r.pool_size << ',' << r.k << ',' << r.repeats << ','
     << exact(r.recall_at_k) << ',' << exact(r.qps) << ',' << r.memory_bytes;
  return os.str();
}

void append_bench_csv(const fs::path& path, const std::vector<BenchRow>& rows) {
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot open " + path.string() + " for appending");
  if (fresh) out << kBenchCsvHeader << "\n";
  for (const auto& r : rows) out << to_csv_line(r) << "\n";
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<BenchRow> read_bench_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<BenchRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != kBenchCsvHeader) throw FormatError(path.string() + ": unexpected csv header");
      continue;
    }
    if (line.empty()) continue;
    const auto f = split_csv(line, line_no);
    if (f.size() != 11) {
      throw FormatError("csv line " + std::to_string(line_no) + ": expected 11 fields, got " +
                        std::to_string(f.size()));
    }
    BenchRow r;
    r.label = f[0];
    r.d = parse_field<std::size_t>(f[1], line_no, "d");
    r.alpha = parse_field<double>(f[2], line_no, "alpha");
    r.entry_clusters = parse_field<std::size_t>(f[3], line_no, "entry_clusters");
    r.max_degree = parse_field<std::size_t>(f[4], line_no, "max_degree");
    r.pool_size = parse_field<std::size_t>(f[5], line_no, "pool_size");
    r.k = parse_field<std::size_t>(f[6], line_no, "k");
    r.repeats = parse_field<std::size_t>(f[7], line_no, "repeats");
    r.recall_at_k = parse_field<double>(f[8], line_no, "recall_at_k");
    r.qps = parse_field<double>(f[9], line_no, "qps");
    r.memory_bytes = parse_field<std::uint64_t>(f[10], line_no, "memory_bytes");
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace anntune::cli
