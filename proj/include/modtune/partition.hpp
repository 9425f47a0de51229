#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>
#include <span>

#include "modtune/graph.hpp"

namespace modtune {

/// Target passed to move_delta / Partition::move to put a node into a fresh
/// singleton community.
inline constexpr int kNewCommunity = -1;

/// Node -> community assignment with per-community sizes and degree sums
/// K_c kept in step with every move. Community indices are always compact.
class Partition {
 public:
  Partition() = default;

  /// All nodes in community 0.
  static Partition whole(const Graph& g) {
    return from_assignment(g, std::vector<int>(g.node_count(), 0));
  }

  static Partition singletons(const Graph& g) {
    std::vector<int> a(g.node_count());
    for (int i = 0; i < g.node_count(); ++i) a[i] = i;
    return from_assignment(g, std::move(a));
  }

  /// Accepts arbitrary non-negative labels and relabels them compactly in
  /// order of first appearance by node index.
  static Partition from_assignment(const Graph& g, std::vector<int> labels) {
    if (static_cast<int>(labels.size()) != g.node_count())
      throw std::invalid_argument("assignment size does not match node count");
    std::vector<int> remap;
    Partition p;
    p.assignment_.resize(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      int l = labels[i];
      if (l < 0) throw std::invalid_argument("negative community label");
      if (static_cast<std::size_t>(l) >= remap.size()) remap.resize(l + 1, -1);
      if (remap[l] < 0) {
        remap[l] = static_cast<int>(p.sizes_.size());
        p.sizes_.push_back(0);
        p.degree_sums_.push_back(0);
      }
      int c = remap[l];
      p.assignment_[i] = c;
      ++p.sizes_[c];
      p.degree_sums_[c] += g.degree(static_cast<int>(i));
    }
    return p;
  }

  int node_count() const noexcept { return static_cast<int>(assignment_.size()); }
  int community_count() const noexcept { return static_cast<int>(sizes_.size()); }
  int community_of(int node) const { return assignment_[node]; }
  std::span<const int> assignment() const noexcept { return assignment_; }
  std::span<const int> sizes() const noexcept { return sizes_; }
  std::span<const std::int64_t> degree_sums() const noexcept { return degree_sums_; }

  /// Members of every community, ascending node order.
  std::vector<std::vector<int>> members() const {
    std::vector<std::vector<int>> out(sizes_.size());
    for (std::size_t c = 0; c < sizes_.size(); ++c) out[c].reserve(sizes_[c]);
    for (int i = 0; i < node_count(); ++i) out[assignment_[i]].push_back(i);
    return out;
  }

  /// Moves `node` to community `target` (or kNewCommunity). When the source
  /// community empties, the highest-indexed community takes its index.
  void move(const Graph& g, int node, int target) {
    const int from = assignment_[node];
    if (target == from) return;
    if (target == kNewCommunity) {
      if (sizes_[from] == 1) return;
      target = community_count();
      sizes_.push_back(0);
      degree_sums_.push_back(0);
    } else if (target < 0 || target >= community_count()) {
      throw std::out_of_range("move target is not a community");
    }
    const auto k = g.degree(node);
    --sizes_[from];
    degree_sums_[from] -= k;
    ++sizes_[target];
    degree_sums_[target] += k;
    assignment_[node] = target;
    if (sizes_[from] == 0) {
      const int last = community_count() - 1;
      if (from != last) {
        for (auto& c : assignment_)
          if (c == last) c = from;
        sizes_[from] = sizes_[last];
        degree_sums_[from] = degree_sums_[last];
      }
      sizes_.pop_back();
      degree_sums_.pop_back();
    }
  }

  /// Relabels communities in order of first appearance by node index.
  Partition canonical(const Graph& g) const { return from_assignment(g, assignment_); }

  /// True when sizes and degree sums match a recomputation from scratch and
  /// labels are compact.
  bool consistent_with(const Graph& g) const {
    if (node_count() != g.node_count()) return false;
    std::vector<int> sz(sizes_.size(), 0);
    std::vector<std::int64_t> ks(sizes_.size(), 0);
    for (int i = 0; i < node_count(); ++i) {
      int c = assignment_[i];
      if (c < 0 || c >= community_count()) return false;
      ++sz[c];
      ks[c] += g.degree(i);
    }
    for (std::size_t c = 0; c < sz.size(); ++c)
      if (sz[c] == 0 || sz[c] != sizes_[c] || ks[c] != degree_sums_[c]) return false;
    return true;
  }

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<int> assignment_;
  std::vector<int> sizes_;
  std::vector<std::int64_t> degree_sums_;
};

/// 4m^2 * Q as an exact integer: sum over communities of 4m*e_c - K_c^2,
/// where e_c counts intra-community edges.
inline std::int64_t modularity_numerator(const Graph& g, const Partition& p) {
  std::vector<std::int64_t> intra(p.community_count(), 0);
  for (int i = 0; i < g.node_count(); ++i) {
    const int c = p.community_of(i);
    for (int j : g.neighbors(i))
      if (i < j && p.community_of(j) == c) ++intra[c];
  }
  const std::int64_t m = g.edge_count();
  std::int64_t num = 0;
  auto K = p.degree_sums();
  for (int c = 0; c < p.community_count(); ++c) num += 4 * m * intra[c] - K[c] * K[c];
  return num;
}

/// Newman-Girvan modularity: intra-edge fraction minus sum_c (K_c/2m)^2.
inline double modularity(const Graph& g, const Partition& p) {
  const double m = static_cast<double>(g.edge_count());
  return static_cast<double>(modularity_numerator(g, p)) / (4.0 * m * m);
}

/// 2m^2 * dQ for moving `node` to `target`; exact in integers.
inline std::int64_t move_gain(const Graph& g, const Partition& p, int node, int target) {
  const int from = p.community_of(node);
  if (target == from) return 0;
  std::int64_t links_to = 0, links_from = 0;
  for (int j : g.neighbors(node)) {
    const int c = p.community_of(j);
    if (c == from) ++links_from;
    else if (c == target) ++links_to;
  }
  const std::int64_t k = g.degree(node);
  const std::int64_t k_to = target == kNewCommunity ? 0 : p.degree_sums()[target];
  const std::int64_t k_from = p.degree_sums()[from];
  return 2 * g.edge_count() * (links_to - links_from) - k * (k_to - k_from + k);
}

/// Change in modularity from moving `node` into community `target`
/// (kNewCommunity for a fresh singleton).
inline double move_delta(const Graph& g, const Partition& p, int node, int target) {
  const double m = static_cast<double>(g.edge_count());
  return static_cast<double>(move_gain(g, p, node, target)) / (2.0 * m * m);
}

}  // namespace modtune
