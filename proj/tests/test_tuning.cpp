#include <gtest/gtest.h>

#include <set>

#include "support.hpp"

using namespace modtune;
using namespace testing_support;

namespace {

std::vector<int> nodes_of(const Graph& g, int lo, int hi) {
  std::vector<int> v;
  for (int i = lo; i <= hi; ++i) v.push_back(g.index_of(std::to_string(i)));
  return v;
}

SplitState contiguous(int n, int cut) {
  SplitState s;
  s.q = 2;
  for (int i = 0; i < n; ++i) s.labels.push_back(i < cut ? 0 : 1);
  return s;
}

// Partition obtained by splitting community c of p per `state`.
Partition apply_split(const Graph& g, const Partition& p, const std::vector<int>& members,
                      const SplitState& state) {
  std::vector<int> labels(p.assignment().begin(), p.assignment().end());
  const int base = p.community_count();
  for (std::size_t i = 0; i < members.size(); ++i)
    if (state.labels[i] > 0) labels[members[i]] = base + state.labels[i];
  return Partition::from_assignment(g, labels);
}

}  // namespace

TEST(SplitDelta, UniformIsZero) {
  Graph g = path9();
  auto all = nodes_of(g, 1, 9);
  SplitState s{3, std::vector<int>(9, 2)};
  EXPECT_EQ(split_delta(g, all, s), 0.0);
}

TEST(SplitDelta, PathValues) {
  Graph g = path9();
  EXPECT_DOUBLE_EQ(split_delta(g, nodes_of(g, 1, 9), contiguous(9, 4)), 47.0 / 128);
  EXPECT_DOUBLE_EQ(split_delta(g, nodes_of(g, 5, 9), contiguous(5, 2)), 1.0 / 32);
}

TEST(SplitDeltaProperty, MatchesRecomputation) {
  Rng rng(404);
  for (int t = 0; t < 1000; ++t) {
    Graph g = random_connected(2 + static_cast<int>(rng.index(25)), 0.1 + 0.3 * rng.uniform(), rng);
    Partition p = random_partition(g, 1 + static_cast<int>(rng.index(4)), rng);
    const auto members = p.members()[rng.index(p.community_count())];
    SplitState s;
    s.q = 2 + static_cast<int>(rng.index(3));
    for (std::size_t i = 0; i < members.size(); ++i) s.labels.push_back(static_cast<int>(rng.index(s.q)));
    const double predicted = split_delta(g, members, s);
    const double actual = modularity(g, apply_split(g, p, members, s)) - modularity(g, p);
    ASSERT_NEAR(predicted, actual, 1e-12) << "case " << t;
  }
}

TEST(FineTune, PathReachesBestBisection) {
  Graph g = path9();
  auto all = nodes_of(g, 1, 9);
  // Best bisection by exhaustive search over all 2^9 label vectors.
  double best = -1;
  for (int mask = 0; mask < 512; ++mask) {
    SplitState s;
    for (int i = 0; i < 9; ++i) s.labels.push_back((mask >> i) & 1);
    best = std::max(best, split_delta(g, all, s));
  }
  EXPECT_DOUBLE_EQ(best, 47.0 / 128);
  for (int cut = 1; cut < 9; ++cut)
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      auto s = fine_tune(g, all, contiguous(9, cut), seed);
      EXPECT_DOUBLE_EQ(split_delta(g, all, s), 47.0 / 128) << "cut " << cut;
    }
}

TEST(FineTune, LocalOptimumUnchangedAfterOnePass) {
  Graph g = path9();
  auto all = nodes_of(g, 1, 9);
  CommunityOperator op(g, all);
  Rng rng(1);
  std::vector<TuneTrace> traces;
  SplitState start = contiguous(9, 4);
  SplitState out = fine_tune(op, start, rng, &traces);
  EXPECT_EQ(out, start);
  ASSERT_EQ(traces.size(), 1u);
  EXPECT_EQ(traces[0].best_index, 0u);
}

TEST(FineTune, Deterministic) {
  Graph g = karate();
  std::vector<int> all(34);
  for (int i = 0; i < 34; ++i) all[i] = i;
  SplitState s;
  for (int i = 0; i < 34; ++i) s.labels.push_back(i % 2);
  EXPECT_EQ(fine_tune(g, all, s, 9), fine_tune(g, all, s, 9));
}

TEST(FineTuneProperty, NeverWorseAndTracesComplete) {
  Rng rng(505);
  for (int t = 0; t < 300; ++t) {
    Graph g = random_connected(2 + static_cast<int>(rng.index(30)), 0.15, rng);
    Partition p = random_partition(g, 1 + static_cast<int>(rng.index(3)), rng);
    const auto members = p.members()[rng.index(p.community_count())];
    SplitState s;
    s.q = 2 + static_cast<int>(rng.index(3));
    for (std::size_t i = 0; i < members.size(); ++i) s.labels.push_back(static_cast<int>(rng.index(s.q)));
    CommunityOperator op(g, members);
    std::vector<TuneTrace> traces;
    const double before = split_delta(op, s);
    SplitState out = fine_tune(op, s, rng, &traces);
    ASSERT_GE(split_delta(op, out), before - 1e-15);
    ASSERT_EQ(out.labels.size(), members.size());
    for (auto& tr : traces) {
      ASSERT_EQ(tr.moves.size(), members.size());
      std::set<int> seen;
      for (auto& mv : tr.moves) {
        seen.insert(mv.node);
        ASSERT_NE(mv.from, mv.to);
      }
      ASSERT_EQ(seen, std::set<int>(members.begin(), members.end()));
      ASSERT_EQ(tr.objective.size(), tr.moves.size() + 1);
      const double peak = *std::max_element(tr.objective.begin(), tr.objective.end());
      ASSERT_EQ(tr.objective[tr.best_index], peak);
    }
  }
}

TEST(FinalTune, PathThreeBlocksToOptimum) {
  Graph g = path9();
  for (bool neighbor_only : {true, false}) {
    Partition out = final_tune(g, path9_partition(g, {{1, 4}, {5, 6}, {7, 9}}), neighbor_only, 3);
    EXPECT_DOUBLE_EQ(modularity(g, out), 53.0 / 128);
    EXPECT_EQ(out.canonical(g), path9_partition(g, {{1, 3}, {4, 6}, {7, 9}}).canonical(g));
  }
}

TEST(FinalTune, OptimumUnchanged) {
  Graph g = path9();
  Partition best = path9_partition(g, {{1, 3}, {4, 6}, {7, 9}});
  Partition out = final_tune(g, best, true, 4);
  EXPECT_DOUBLE_EQ(modularity(g, out), 53.0 / 128);
}

TEST(FinalTune, BridgedTrianglesFromWhole) {
  Graph g = bridged_triangles();
  for (bool neighbor_only : {true, false}) {
    Partition out = final_tune(g, Partition::whole(g), neighbor_only, 5);
    EXPECT_DOUBLE_EQ(modularity(g, out), 5.0 / 14);
    EXPECT_EQ(out.community_count(), 2);
    EXPECT_EQ(out.community_of(g.index_of("1")), out.community_of(g.index_of("3")));
    EXPECT_NE(out.community_of(g.index_of("3")), out.community_of(g.index_of("4")));
  }
}

TEST(FinalTuneProperty, NeverLowersModularity) {
  Rng rng(606);
  for (int t = 0; t < 200; ++t) {
    Graph g = random_connected(2 + static_cast<int>(rng.index(40)), 0.1, rng);
    Partition p = random_partition(g, 1 + static_cast<int>(rng.index(6)), rng);
    std::vector<TuneTrace> traces;
    Partition out = final_tune(g, p, t % 2 == 0, rng, &traces);
    ASSERT_TRUE(out.consistent_with(g));
    ASSERT_GE(modularity(g, out), modularity(g, p) - 1e-15);
    for (auto& tr : traces) {
      ASSERT_EQ(static_cast<int>(tr.moves.size()), g.node_count());
      std::set<int> seen;
      for (auto& mv : tr.moves) seen.insert(mv.node);
      ASSERT_EQ(static_cast<int>(seen.size()), g.node_count());
    }
  }
}

TEST(FinalTune, Deterministic) {
  Graph g = karate();
  Partition p = Partition::singletons(g);
  EXPECT_EQ(final_tune(g, p, true, 10), final_tune(g, p, true, 10));
  EXPECT_EQ(final_tune(g, p, false, 10), final_tune(g, p, false, 10));
}
