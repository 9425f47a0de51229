#pragma once

#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "modtune/graph.hpp"
#include "modtune/partition.hpp"
#include "modtune/rng.hpp"
#include "modtune/spectral.hpp"
#include "modtune/tuning.hpp"

namespace modtune {

struct DetectConfig {
  int q = 2;
  bool final_tuning = true;
  bool neighbor_only = true;
  std::uint64_t seed = 0x5eed;
  int restarts = 1;
  double eig_tol = 1e-10;
  int max_iters = 0;  // 0: max(1000, 100 * |C|)
  double improvement_eps = 1e-12;
  int threads = 1;    // restarts run concurrently; results do not depend on it

  void validate() const {
    if (q < 2) throw std::invalid_argument("q must be at least 2");
    if (restarts < 1) throw std::invalid_argument("restarts must be at least 1");
    if (threads < 1) throw std::invalid_argument("threads must be at least 1");
    if (!(eig_tol > 0) || !(improvement_eps > 0) || max_iters < 0)
      throw std::invalid_argument("tolerances must be positive");
  }
};

struct DetectResult {
  Partition partition;
  double modularity = 0.0;
  int rounds = 0;
  std::vector<double> round_trace;  // Q after each round; [0] is the all-in-one start
  std::uint64_t seed = 0;
  int nonconverged = 0;  // communities left whole because the eigensolver failed
};

namespace detail {

// Tries to divide one community. Returns the new sub-community labels
// (compact, 0-based) when the split raises Q by more than eps, else empty.
inline std::vector<int> try_divide(const Graph& g, std::span<const int> members,
                                   const DetectConfig& cfg, Rng& rng, int& nonconverged) {
  if (members.size() < 2) return {};
  const CommunityOperator op(g, members);
  EigenOptions po;
  po.tol = cfg.eig_tol;
  po.max_iters = cfg.max_iters;
  EigenPair eig;
  try {
    eig = leading_eigenpair(op, rng, po);
  } catch (const ConvergenceError&) {
    ++nonconverged;
    return {};
  }
  SplitState state = assignment_thresholds(eig.vector, cfg.q, op.size());
  if (state.uniform()) return {};
  state = fine_tune(op, std::move(state), rng);
  if (state.uniform() || split_delta(op, state) <= cfg.improvement_eps) return {};

  // Drop empty groups.
  std::vector<int> remap(cfg.q, -1);
  int used = 0;
  for (auto& l : state.labels) {
    if (remap[l] < 0) remap[l] = used++;
    l = remap[l];
  }
  return state.labels;
}

// Same member set as some community of `before` that was marked indivisible.
inline std::vector<char> carry_marks(const Partition& before, const std::vector<char>& marks,
                                     const Partition& after) {
  std::vector<char> out(after.community_count(), 0);
  std::vector<char> same(after.community_count(), 1);
  std::vector<int> origin(after.community_count(), -1);
  for (int v = 0; v < after.node_count(); ++v) {
    const int c = after.community_of(v);
    const int o = before.community_of(v);
    if (origin[c] < 0) origin[c] = o;
    else if (origin[c] != o) same[c] = 0;
  }
  for (int c = 0; c < after.community_count(); ++c)
    if (same[c] && origin[c] >= 0 && after.sizes()[c] == before.sizes()[origin[c]])
      out[c] = marks[origin[c]];
  return out;
}

}  // namespace detail

/// Rounds of q-section division with fine-tuning, each followed by a global
/// final-tuning pass, until a round no longer raises Q.
inline DetectResult detect(const Graph& g, const DetectConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  DetectResult res;
  res.seed = cfg.seed;

  Partition p = Partition::whole(g);
  std::vector<char> indivisible(1, 0);
  double q_now = modularity(g, p);
  res.round_trace.push_back(q_now);

  for (;;) {
    ++res.rounds;
    const double q_before = q_now;

    // Division: every community present at the start of the round, once.
    auto groups = p.members();
    std::vector<int> labels(p.assignment().begin(), p.assignment().end());
    int next_label = p.community_count();
    std::vector<char> marks = indivisible;
    for (std::size_t c = 0; c < groups.size(); ++c) {
      if (indivisible[c]) continue;
      auto sub = detail::try_divide(g, groups[c], cfg, rng, res.nonconverged);
      if (sub.empty()) {
        marks[c] = 1;
        continue;
      }
      int parts = 0;
      for (int l : sub) parts = std::max(parts, l + 1);
      for (std::size_t i = 0; i < sub.size(); ++i)
        if (sub[i] > 0) labels[groups[c][i]] = next_label + sub[i] - 1;
      next_label += parts - 1;
      marks.resize(next_label, 0);
    }
    Partition divided = Partition::from_assignment(g, labels);
    // from_assignment relabels by first appearance; carry the marks across.
    std::vector<char> divided_marks(divided.community_count(), 0);
    for (int v = 0; v < g.node_count(); ++v) divided_marks[divided.community_of(v)] = marks[labels[v]];
    p = std::move(divided);
    indivisible = std::move(divided_marks);
    q_now = modularity(g, p);

    if (cfg.final_tuning) {
      Partition tuned = final_tune(g, p, cfg.neighbor_only, rng);
      const double q_tuned = modularity(g, tuned);
      if (q_tuned > q_now) {
        indivisible = detail::carry_marks(p, indivisible, tuned);
        p = std::move(tuned);
        q_now = q_tuned;
      }
    }
    res.round_trace.push_back(q_now);
    if (q_now - q_before <= cfg.improvement_eps) break;
  }
  res.partition = p.canonical(g);
  res.modularity = modularity(g, res.partition);
  return res;
}

/// Best of cfg.restarts independent runs with seeds seed, seed+1, ...
/// (first on ties). Runs are spread over cfg.threads workers.
inline DetectResult detect_best(const Graph& g, const DetectConfig& cfg) {
  cfg.validate();
  std::vector<DetectResult> results(cfg.restarts);
  auto run = [&](int i) {
    DetectConfig c = cfg;
    c.seed = cfg.seed + static_cast<std::uint64_t>(i);
    results[i] = detect(g, c);
  };
  const int workers = std::min(cfg.threads, cfg.restarts);
  if (workers <= 1) {
    for (int i = 0; i < cfg.restarts; ++i) run(i);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (int i = w; i < cfg.restarts; i += workers) run(i);
      });
    for (auto& t : pool) t.join();
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i)
    if (results[i].modularity > results[best].modularity) best = i;
  return std::move(results[best]);
}

}  // namespace modtune
