#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>
#include <span>

#include "modtune/graph.hpp"
#include "modtune/partition.hpp"
#include "modtune/rng.hpp"
#include "modtune/spectral.hpp"

namespace modtune {

struct TuneMove {
  int node;  // graph node index
  int from;
  int to;    // kNewCommunity never appears here; new communities get a fresh index
};

/// One Kernighan-Lin style pass. objective[0] is the value before any move,
/// objective[i] the value after moves[i-1]; best_index is the first position
/// of the maximum.
struct TuneTrace {
  std::vector<TuneMove> moves;
  std::vector<double> objective;
  std::size_t best_index = 0;
};

namespace detail {

// 4m^2 * dQ of splitting the community per `labels`:
//   sum_g 4m e_g - K_g^2 - 2m a_g + K_g K_C
// with e_g intra-group edges, K_g group degree sum, a_g the group's summed
// in-community degree.
inline std::int64_t split_numerator(const CommunityOperator& op, std::span<const int> labels, int q) {
  const std::int64_t m = op.edge_count();
  std::vector<std::int64_t> e(q, 0), K(q, 0), a(q, 0);
  for (int i = 0; i < op.size(); ++i) {
    const int g = labels[i];
    K[g] += op.degree(i);
    a[g] += op.internal_degree(i);
    for (int j : op.local_neighbors(i))
      if (i < j && labels[j] == g) ++e[g];
  }
  std::int64_t num = 0;
  for (int g = 0; g < q; ++g) num += 4 * m * e[g] - K[g] * K[g] - 2 * m * a[g] + K[g] * op.degree_sum();
  return num;
}

}  // namespace detail

/// Modularity gained by splitting the community into the groups of `state`.
inline double split_delta(const CommunityOperator& op, const SplitState& state) {
  const double m = static_cast<double>(op.edge_count());
  return static_cast<double>(detail::split_numerator(op, state.labels, state.q)) / (4.0 * m * m);
}

inline double split_delta(const Graph& g, std::span<const int> members, const SplitState& state) {
  return split_delta(CommunityOperator(g, members), state);
}

/// Kernighan-Lin refinement of a q-way split of one community.
///
/// Each pass moves every member exactly once, always taking the best
/// available reassignment to another group even when it lowers the split's
/// modularity (exact ties broken by `rng`), then rolls back to the best
/// intermediate state. Passes repeat until one brings no improvement.
inline SplitState fine_tune(const CommunityOperator& op, SplitState state, Rng& rng,
                            std::vector<TuneTrace>* traces = nullptr) {
  const int n = op.size();
  const int q = state.q;
  const std::int64_t two_m = 2 * op.edge_count();
  const double norm = 2.0 * static_cast<double>(op.edge_count()) * static_cast<double>(op.edge_count());
  const SplitState initial = state;
  const std::int64_t initial_num = detail::split_numerator(op, state.labels, q);

  auto& s = state.labels;
  std::vector<std::int64_t> K(q, 0);
  std::vector<std::int64_t> links(static_cast<std::size_t>(n) * q, 0);  // links[i*q+g]
  for (int i = 0; i < n; ++i) {
    K[s[i]] += op.degree(i);
    for (int j : op.local_neighbors(i)) ++links[static_cast<std::size_t>(i) * q + s[j]];
  }
  auto relabel = [&](int v, int to) {
    const int from = s[v];
    K[from] -= op.degree(v);
    K[to] += op.degree(v);
    for (int j : op.local_neighbors(v)) {
      --links[static_cast<std::size_t>(j) * q + from];
      ++links[static_cast<std::size_t>(j) * q + to];
    }
    s[v] = to;
  };

  // Running value in units of 1/(2m^2); split numerators are in 1/(4m^2).
  std::int64_t value = initial_num / 2;
  std::vector<char> moved(n);
  std::vector<std::pair<int, int>> ties;
  std::vector<TuneMove> moves;
  std::vector<int> order;  // local index of each move
  for (;;) {
    std::fill(moved.begin(), moved.end(), 0);
    moves.clear();
    order.clear();
    TuneTrace trace;
    const double base = static_cast<double>(value) / norm;
    trace.objective.push_back(base);
    std::int64_t cum = 0, best_cum = 0;
    std::size_t best_index = 0;

    for (int step = 0; step < n; ++step) {
      std::int64_t best = INT64_MIN;
      ties.clear();
      for (int i = 0; i < n; ++i) {
        if (moved[i]) continue;
        const int a = s[i];
        const std::int64_t k = op.degree(i);
        const std::int64_t* li = &links[static_cast<std::size_t>(i) * q];
        for (int b = 0; b < q; ++b) {
          if (b == a) continue;
          const std::int64_t gain = two_m * (li[b] - li[a]) - k * (K[b] - K[a] + k);
          if (gain > best) {
            best = gain;
            ties.clear();
          }
          if (gain == best) ties.emplace_back(i, b);
        }
      }
      const auto [v, to] = ties.size() == 1 ? ties[0] : ties[rng.index(ties.size())];
      moves.push_back({op.members()[v], s[v], to});
      order.push_back(v);
      relabel(v, to);
      moved[v] = 1;
      cum += best;
      trace.objective.push_back(base + static_cast<double>(cum) / norm);
      if (cum > best_cum) {
        best_cum = cum;
        best_index = moves.size();
      }
    }
    // Undo everything after the best intermediate state.
    for (std::size_t t = moves.size(); t > best_index; --t) relabel(order[t - 1], moves[t - 1].from);
    if (traces) {
      trace.moves = moves;
      trace.best_index = best_index;
      traces->push_back(std::move(trace));
    }
    if (best_cum <= 0) break;
    value += best_cum;
  }
  if (detail::split_numerator(op, state.labels, q) < initial_num) return initial;
  return state;
}

inline SplitState fine_tune(const Graph& g, std::span<const int> members, SplitState state,
                            std::uint64_t seed) {
  Rng rng(seed);
  return fine_tune(CommunityOperator(g, members), std::move(state), rng);
}

/// Global refinement over a whole partition.
///
/// Every sweep moves each node exactly once: at each step the single best
/// move of any not-yet-moved node to another existing community or to a new
/// community of its own is made (even when it lowers Q, exact ties broken by
/// `rng`) and the node is fixed. The sweep then rolls back to its best
/// intermediate partition. Sweeps repeat until one brings no improvement, so
/// the result is never worse than the input.
///
/// With `neighbor_only`, the candidate targets of a node are the communities
/// of its neighbours plus the new-community option.
inline Partition final_tune(const Graph& g, const Partition& p, bool neighbor_only, Rng& rng,
                            std::vector<TuneTrace>* traces = nullptr) {
  const int n = g.node_count();
  const std::int64_t m = g.edge_count();
  const std::int64_t two_m = 2 * m;
  const double norm = 2.0 * static_cast<double>(m) * static_cast<double>(m);

  std::vector<int> comm(p.assignment().begin(), p.assignment().end());
  std::vector<std::int64_t> K(p.degree_sums().begin(), p.degree_sums().end());
  std::vector<int> size(p.sizes().begin(), p.sizes().end());
  std::int64_t value = modularity_numerator(g, p) / 2;

  auto relocate = [&](int v, int to) {
    if (to == kNewCommunity) {
      to = static_cast<int>(K.size());
      K.push_back(0);
      size.push_back(0);
    }
    const int from = comm[v];
    K[from] -= g.degree(v);
    --size[from];
    K[to] += g.degree(v);
    ++size[to];
    comm[v] = to;
    return to;
  };

  struct Candidate {
    int node;
    int target;
    bool operator<(const Candidate& o) const {
      // kNewCommunity sorts after every real community.
      if (node != o.node) return node < o.node;
      return static_cast<unsigned>(target) < static_cast<unsigned>(o.target);
    }
  };
  std::vector<Candidate> ties;
  std::vector<char> fixed(n);
  std::vector<TuneMove> moves;
  std::vector<std::int64_t> links;

  // Per node, the communities of its neighbours with link counts, in slots
  // [offset[v], offset[v] + used[v]). Kept current across moves.
  std::vector<std::int64_t> offset(n + 1, 0);
  for (int v = 0; v < n; ++v) offset[v + 1] = offset[v] + g.degree(v);
  std::vector<int> slot_comm(static_cast<std::size_t>(offset[n]));
  std::vector<int> slot_links(static_cast<std::size_t>(offset[n]));
  std::vector<int> used(n, 0);
  auto rebuild_slots = [&] {
    for (int v = 0; v < n; ++v) {
      used[v] = 0;
      const std::int64_t base = offset[v];
      for (int u : g.neighbors(v)) {
        const int c = comm[u];
        int s = 0;
        while (s < used[v] && slot_comm[base + s] != c) ++s;
        if (s == used[v]) {
          slot_comm[base + s] = c;
          slot_links[base + s] = 0;
          ++used[v];
        }
        ++slot_links[base + s];
      }
    }
  };
  auto shift_link = [&](int v, int from, int to) {
    const std::int64_t base = offset[v];
    int s = 0;
    while (slot_comm[base + s] != from) ++s;
    if (--slot_links[base + s] == 0) {
      const int last = --used[v];
      slot_comm[base + s] = slot_comm[base + last];
      slot_links[base + s] = slot_links[base + last];
    }
    s = 0;
    while (s < used[v] && slot_comm[base + s] != to) ++s;
    if (s == used[v]) {
      slot_comm[base + s] = to;
      slot_links[base + s] = 0;
      ++used[v];
    }
    ++slot_links[base + s];
  };
  auto move_node = [&](int v, int to) {
    const int from = comm[v];
    to = relocate(v, to);
    for (int u : g.neighbors(v)) shift_link(u, from, to);
    return to;
  };
  rebuild_slots();

  for (;;) {
    std::fill(fixed.begin(), fixed.end(), 0);
    moves.clear();
    TuneTrace trace;
    const double base = static_cast<double>(value) / norm;
    trace.objective.push_back(base);
    std::int64_t cum = 0, best_cum = 0;
    std::size_t best_index = 0;

    for (int step = 0; step < n; ++step) {
      std::int64_t best = INT64_MIN;
      ties.clear();
      auto consider = [&](int v, int target, std::int64_t gain) {
        if (gain > best) {
          best = gain;
          ties.clear();
        }
        if (gain == best) ties.push_back({v, target});
      };

      for (int v = 0; v < n; ++v) {
        if (fixed[v]) continue;
        const int x = comm[v];
        const std::int64_t k = g.degree(v);
        const std::int64_t kx = K[x];
        const int* sc = &slot_comm[offset[v]];
        const int* sl = &slot_links[offset[v]];
        std::int64_t lx = 0;
        for (int s = 0; s < used[v]; ++s)
          if (sc[s] == x) lx = sl[s];
        if (neighbor_only) {
          for (int s = 0; s < used[v]; ++s)
            if (sc[s] != x) consider(v, sc[s], two_m * (sl[s] - lx) - k * (K[sc[s]] - kx + k));
        } else {
          links.assign(K.size(), 0);
          for (int s = 0; s < used[v]; ++s) links[sc[s]] = sl[s];
          for (int c = 0; c < static_cast<int>(K.size()); ++c)
            if (c != x && size[c] > 0) consider(v, c, two_m * (links[c] - lx) - k * (K[c] - kx + k));
        }
        consider(v, kNewCommunity, -two_m * lx - k * (k - kx));
      }

      if (ties.size() > 1) std::sort(ties.begin(), ties.end());
      const Candidate pick = ties.size() == 1 ? ties[0] : ties[rng.index(ties.size())];
      const int from = comm[pick.node];
      int to = from;
      // A singleton moving into a community of its own stays where it is.
      if (!(pick.target == kNewCommunity && size[from] == 1)) to = move_node(pick.node, pick.target);
      moves.push_back({pick.node, from, to});
      fixed[pick.node] = 1;
      cum += best;
      trace.objective.push_back(base + static_cast<double>(cum) / norm);
      if (cum > best_cum) {
        best_cum = cum;
        best_index = moves.size();
      }
    }
    for (std::size_t t = moves.size(); t > best_index; --t) {
      const auto& mv = moves[t - 1];
      if (mv.to != mv.from) move_node(mv.node, mv.from);
    }
    if (traces) {
      trace.moves = moves;
      trace.best_index = best_index;
      traces->push_back(std::move(trace));
    }

    // Compact away communities emptied or left unused during the sweep.
    std::vector<int> remap(K.size(), -1);
    std::vector<std::int64_t> K2;
    std::vector<int> size2;
    for (std::size_t c = 0; c < K.size(); ++c)
      if (size[c] > 0) {
        remap[c] = static_cast<int>(K2.size());
        K2.push_back(K[c]);
        size2.push_back(size[c]);
      }
    for (auto& c : comm) c = remap[c];
    for (int v = 0; v < n; ++v)
      for (int s = 0; s < used[v]; ++s) slot_comm[offset[v] + s] = remap[slot_comm[offset[v] + s]];
    K = std::move(K2);
    size = std::move(size2);

    if (best_cum <= 0) break;
    value += best_cum;
  }
  return Partition::from_assignment(g, std::move(comm));
}

inline Partition final_tune(const Graph& g, const Partition& p, bool neighbor_only, std::uint64_t seed) {
  Rng rng(seed);
  return final_tune(g, p, neighbor_only, rng);
}

}  // namespace modtune
