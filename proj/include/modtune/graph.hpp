#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>
#include <span>

namespace modtune {

/// Raised for malformed edge-list input. Carries the 1-based line number
/// (0 when the error is not tied to a line).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class GraphError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Undirected simple graph in compressed adjacency form. Immutable once
/// built; safe to share across threads.
class Graph {
 public:
  Graph() = default;

  /// Builds a graph over nodes 0..n-1. Duplicate edges are collapsed and
  /// counted; self-loops are rejected. Labels default to "0".."n-1".
  static Graph from_edges(int n, std::span<const std::pair<int, int>> edges,
                          std::vector<std::string> labels = {}) {
    if (n <= 0) throw GraphError("graph has no nodes");
    if (labels.empty()) {
      labels.reserve(n);
      for (int i = 0; i < n; ++i) labels.push_back(std::to_string(i));
    }
    if (static_cast<int>(labels.size()) != n)
      throw GraphError("label count does not match node count");

    std::vector<std::vector<int>> adj(n);
    for (auto [u, v] : edges) {
      if (u < 0 || v < 0 || u >= n || v >= n) throw GraphError("edge endpoint out of range");
      if (u == v) throw GraphError("self-loop on node " + labels[u]);
      adj[u].push_back(v);
      adj[v].push_back(u);
    }

    Graph g;
    g.offsets_.assign(n + 1, 0);
    std::size_t dup_half_edges = 0;
    for (int i = 0; i < n; ++i) {
      auto& a = adj[i];
      std::sort(a.begin(), a.end());
      auto last = std::unique(a.begin(), a.end());
      dup_half_edges += static_cast<std::size_t>(a.end() - last);
      a.erase(last, a.end());
      g.offsets_[i + 1] = g.offsets_[i] + static_cast<std::int64_t>(a.size());
    }
    g.neighbors_.reserve(static_cast<std::size_t>(g.offsets_[n]));
    for (auto& a : adj) g.neighbors_.insert(g.neighbors_.end(), a.begin(), a.end());
    g.edge_count_ = g.offsets_[n] / 2;
    g.duplicate_edges_ = dup_half_edges / 2;
    g.labels_ = std::move(labels);
    g.index_.reserve(g.labels_.size());
    for (int i = 0; i < n; ++i) {
      if (!g.index_.emplace(g.labels_[i], i).second)
        throw GraphError("duplicate node label " + g.labels_[i]);
    }
    return g;
  }

  int node_count() const noexcept { return static_cast<int>(labels_.size()); }
  std::int64_t edge_count() const noexcept { return edge_count_; }
  std::int64_t degree(int i) const noexcept { return offsets_[i + 1] - offsets_[i]; }

  std::span<const int> neighbors(int i) const noexcept {
    return {neighbors_.data() + offsets_[i], static_cast<std::size_t>(degree(i))};
  }

  bool has_edge(int i, int j) const {
    auto nb = neighbors(i);
    return std::binary_search(nb.begin(), nb.end(), j);
  }

  const std::string& label(int i) const { return labels_[i]; }
  std::span<const std::string> labels() const noexcept { return labels_; }

  /// Internal index of an original label, or -1.
  int index_of(std::string_view label) const {
    auto it = index_.find(std::string(label));
    return it == index_.end() ? -1 : it->second;
  }

  /// Number of input edges dropped as duplicates during construction.
  std::size_t duplicate_edges() const noexcept { return duplicate_edges_; }

  /// Edge list with i < j, ascending.
  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(static_cast<std::size_t>(edge_count_));
    for (int i = 0; i < node_count(); ++i)
      for (int j : neighbors(i))
        if (i < j) out.emplace_back(i, j);
    return out;
  }

 private:
  std::vector<std::int64_t> offsets_;
  std::vector<int> neighbors_;
  std::int64_t edge_count_ = 0;
  std::size_t duplicate_edges_ = 0;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> index_;
};

/// Reads a whitespace-separated edge list. '#' lines and blank lines are
/// skipped; node tokens are arbitrary strings numbered by first appearance.
inline Graph parse_edge_list(std::istream& in) {
  std::vector<std::string> labels;
  std::unordered_map<std::string, int> index;
  std::vector<std::pair<int, int>> edges;
  auto intern = [&](const std::string& tok) {
    auto [it, inserted] = index.emplace(tok, static_cast<int>(labels.size()));
    if (inserted) labels.push_back(tok);
    return it->second;
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string a, b, extra;
    if (!(ls >> a >> b) || (ls >> extra))
      throw ParseError(lineno, "expected exactly two node tokens, got '" + line + "'");
    if (a == b) throw ParseError(lineno, "self-loop on node '" + a + "' is not allowed");
    int u = intern(a);
    int v = intern(b);
    edges.emplace_back(u, v);
  }
  if (edges.empty()) throw ParseError(0, "edge list contains no edges");
  const int n = static_cast<int>(labels.size());
  return Graph::from_edges(n, edges, std::move(labels));
}

inline Graph parse_edge_list(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_edge_list(in);
}

/// Canonical text form: one "u v" line per edge (u < v by internal index),
/// using original labels.
inline std::string serialize_edge_list(const Graph& g) {
  std::string out;
  for (auto [i, j] : g.edges()) {
    out += g.label(i);
    out += ' ';
    out += g.label(j);
    out += '\n';
  }
  return out;
}

/// Connected components via BFS; returns the component id of every node.
inline std::vector<int> connected_components(const Graph& g, int* count = nullptr) {
  const int n = g.node_count();
  std::vector<int> comp(n, -1);
  std::vector<int> queue;
  queue.reserve(n);
  int c = 0;
  for (int s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    queue.clear();
    queue.push_back(s);
    comp[s] = c;
    for (std::size_t h = 0; h < queue.size(); ++h)
      for (int v : g.neighbors(queue[h]))
        if (comp[v] < 0) {
          comp[v] = c;
          queue.push_back(v);
        }
    ++c;
  }
  if (count) *count = c;
  return comp;
}

inline bool is_connected(const Graph& g) {
  int c = 0;
  connected_components(g, &c);
  return c == 1;
}

}  // namespace modtune
