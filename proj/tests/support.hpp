#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "modtune/modtune.hpp"

namespace testing_support {

using modtune::Graph;

inline std::string data_path(const std::string& name) { return std::string(MODTUNE_DATA_DIR) + "/" + name; }

inline Graph path9() { return modtune::read_edge_list_file(data_path("path9.txt")); }
inline Graph karate() { return modtune::read_edge_list_file(data_path("karate.txt")); }

inline Graph triangle() { return modtune::parse_edge_list("1 2\n2 3\n1 3\n"); }

// Two triangles {1,2,3} and {4,5,6} joined by the bridge 3-4.
inline Graph bridged_triangles() {
  return modtune::parse_edge_list("1 2\n2 3\n1 3\n4 5\n5 6\n4 6\n3 4\n");
}

// Community labels for path-9 given as 1-based node ranges.
inline modtune::Partition path9_partition(const Graph& g, std::vector<std::pair<int, int>> ranges) {
  std::vector<int> labels(g.node_count(), -1);
  for (std::size_t c = 0; c < ranges.size(); ++c)
    for (int v = ranges[c].first; v <= ranges[c].second; ++v)
      labels[g.index_of(std::to_string(v))] = static_cast<int>(c);
  return modtune::Partition::from_assignment(g, labels);
}

// Random connected graph: a random spanning tree plus extra edges with
// probability p.
inline Graph random_connected(int n, double p, modtune::Rng& rng) {
  std::vector<std::pair<int, int>> edges;
  for (int v = 1; v < n; ++v) edges.emplace_back(static_cast<int>(rng.index(v)), v);
  for (int i = 0; i < n; ++i)
    for (int j = i + 2; j < n; ++j)
      if (rng.uniform() < p) edges.emplace_back(i, j);
  return Graph::from_edges(n, edges);
}

inline modtune::Partition random_partition(const Graph& g, int max_groups, modtune::Rng& rng) {
  std::vector<int> labels(g.node_count());
  for (auto& l : labels) l = static_cast<int>(rng.index(max_groups));
  return modtune::Partition::from_assignment(g, labels);
}

}  // namespace testing_support
