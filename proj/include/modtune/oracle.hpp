#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "modtune/graph.hpp"
#include "modtune/partition.hpp"

namespace modtune {

/// Bell numbers B_0..B_25 fit in 64 bits.
inline std::uint64_t bell_number(int n) {
  if (n < 0 || n > 25) throw std::out_of_range("bell_number: n out of range");
  std::vector<std::uint64_t> row{1};
  for (int i = 0; i < n; ++i) {
    std::vector<std::uint64_t> next{row.back()};
    for (auto v : row) next.push_back(next.back() + v);
    row = std::move(next);
  }
  return row.front();
}

class OracleLimitError : public std::runtime_error {
 public:
  OracleLimitError(int n, int limit)
      : std::runtime_error("graph has " + std::to_string(n) + " nodes, above the oracle limit of " +
                           std::to_string(limit) + ": exhaustive search would visit Bell number B_" +
                           std::to_string(n) +
                           (n <= 25 ? " = " + std::to_string(bell_number(n)) : std::string(" > 4.6e18")) +
                           " partitions") {}
};

struct OracleResult {
  Partition best_partition;
  double best_q = 0.0;
  std::uint64_t partitions_examined = 0;
};

/// Maximum modularity by enumerating every set partition as a restricted
/// growth string. Q is accumulated exactly in integers as nodes are
/// assigned; the first maximiser in enumeration order wins.
inline OracleResult exact_max(const Graph& g, int node_limit = 12) {
  const int n = g.node_count();
  if (n > node_limit) throw OracleLimitError(n, node_limit);
  const std::int64_t m = g.edge_count();

  std::vector<int> label(n, -1);
  std::vector<int> best_label;
  std::vector<std::int64_t> K(n, 0);
  std::vector<std::int64_t> links(static_cast<std::size_t>(n) * (n + 1), 0);  // per depth
  std::int64_t best = INT64_MIN;
  std::uint64_t examined = 0;

  // num = 4m * intra - sum K_b^2 over the assigned prefix.
  auto recurse = [&](auto&& self, int v, int blocks, std::int64_t num) -> void {
    if (v == n) {
      ++examined;
      if (num > best) {
        best = num;
        best_label = label;
      }
      return;
    }
    const std::int64_t k = g.degree(v);
    std::int64_t* into = &links[static_cast<std::size_t>(v) * (n + 1)];
    std::fill(into, into + blocks + 1, 0);
    for (int u : g.neighbors(v))
      if (u < v) ++into[label[u]];
    for (int b = 0; b <= blocks; ++b) {
      const std::int64_t delta = 4 * m * into[b] - (2 * K[b] * k + k * k);
      label[v] = b;
      K[b] += k;
      self(self, v + 1, b == blocks ? blocks + 1 : blocks, num + delta);
      K[b] -= k;
    }
    label[v] = -1;
  };
  recurse(recurse, 0, 0, 0);

  OracleResult r;
  r.best_partition = Partition::from_assignment(g, best_label);
  r.best_q = static_cast<double>(best) / (4.0 * static_cast<double>(m) * static_cast<double>(m));
  r.partitions_examined = examined;
  return r;
}

}  // namespace modtune
