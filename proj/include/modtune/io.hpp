#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "modtune/graph.hpp"
#include "modtune/partition.hpp"

namespace modtune {

inline Graph read_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_edge_list(in);
}

/// RFC 4180 field quoting: fields holding a comma, quote, CR or LF are
/// wrapped in quotes with inner quotes doubled.
inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

/// Splits one CSV record (no embedded newlines).
inline std::vector<std::string> csv_split(std::string_view line) {
  std::vector<std::string> out;
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
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

/// `node,community` with original labels, one row per node in index order.
inline void write_partition_csv(std::ostream& os, const Graph& g, const Partition& p) {
  os << "node,community\n";
  for (int i = 0; i < g.node_count(); ++i) os << csv_field(g.label(i)) << ',' << p.community_of(i) << '\n';
}

inline Partition read_partition_csv(std::istream& in, const Graph& g) {
  std::string line;
  if (!std::getline(in, line) || csv_split(line) != std::vector<std::string>{"node", "community"})
    throw std::runtime_error("partition CSV must start with header node,community");
  std::vector<int> labels(g.node_count(), -1);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = csv_split(line);
    if (f.size() != 2) throw std::runtime_error("bad partition row: " + line);
    const int v = g.index_of(f[0]);
    if (v < 0) throw std::runtime_error("unknown node " + f[0]);
    labels[v] = std::stoi(f[1]);
  }
  for (int l : labels)
    if (l < 0) throw std::runtime_error("partition CSV does not cover every node");
  return Partition::from_assignment(g, std::move(labels));
}

inline void write_histogram_csv(std::ostream& os, const std::map<int, std::int64_t>& hist) {
  os << "size,count\n";
  for (auto [s, c] : hist) os << s << ',' << c << '\n';
}

/// Doubles are written with 17 significant digits so they round-trip.
inline std::string format_real(double x) {
  std::ostringstream ss;
  ss.precision(17);
  ss << x;
  return ss.str();
}

inline void write_qdist_csv(std::ostream& os, const std::vector<double>& q) {
  os << "network_index,modularity\n";
  for (std::size_t i = 0; i < q.size(); ++i) os << i << ',' << format_real(q[i]) << '\n';
}

}  // namespace modtune
