#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"

using namespace packcount;

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(a.next(), b.next());
}

TEST(Rng, SplitStreamsDiffer) {
  const Rng root(7);
  std::set<std::uint64_t> firsts;
  for (std::uint64_t id = 0; id < 1000; ++id) {
    Rng child = root.split(id);
    firsts.insert(child.next());
  }
  EXPECT_EQ(firsts.size(), 1000u);
  Rng again = root.split(3);
  Rng other = root.split(3);
  EXPECT_EQ(again.next(), other.next());
}

TEST(Rng, NestedSplitsDiffer) {
  const Rng root(1);
  std::set<std::uint64_t> firsts;
  for (std::uint64_t i = 0; i < 30; ++i)
    for (std::uint64_t j = 0; j < 30; ++j) firsts.insert(root.split(i).split(j).next());
  EXPECT_EQ(firsts.size(), 900u);
}

TEST(Rng, BelowIsRoughlyUniform) {
  Rng r(3);
  std::vector<std::uint64_t> counts(7, 0);
  for (int k = 0; k < 70000; ++k) ++counts[r.below(7)];
  EXPECT_GT(oracle::chi_square_uniform_pvalue(counts), 1e-4);
}

TEST(Permutation, RejectsNonBijection) {
  EXPECT_THROW(Permutation(std::vector<int>{0, 0, 1}), InvalidArgument);
  EXPECT_THROW(Permutation(std::vector<int>{0, 3, 1}), InvalidArgument);
}

TEST(Permutation, ComposeAndInverse) {
  Rng r(5);
  for (int k = 0; k < 100; ++k) {
    const auto p = Permutation::random(6, r);
    EXPECT_EQ(p.compose(p.inverse()), Permutation::identity(6));
    EXPECT_EQ(p.inverse().compose(p), Permutation::identity(6));
  }
}

TEST(CayleyDistance, TrivialCases) {
  const auto id = Permutation::identity(5);
  EXPECT_EQ(cayley_distance(id, id), 0);
  EXPECT_EQ(cayley_distance(id, apply({1, 3}, id)), 1);
  EXPECT_THROW(cayley_distance(id, Permutation::identity(4)), InvalidArgument);
}

TEST(CayleyDistance, MatchesBfsOnS4) {
  const auto perms = all_permutations(4);
  for (const auto& r : perms) {
    const auto dist = oracle::bfs_cayley(r.images());
    for (const auto& s : perms) EXPECT_EQ(cayley_distance(r, s), dist.at(s.images()));
  }
}

TEST(TranspositionPath, EmptyWhenEqual) {
  const auto p = Permutation(std::vector<int>{2, 0, 1});
  EXPECT_EQ(transposition_path(p, p).length(), 0);
}

TEST(TranspositionPath, ThreeCycleHasLengthTwo) {
  const auto path = transposition_path(Permutation::identity(3), Permutation(std::vector<int>{1, 2, 0}));
  EXPECT_EQ(path.length(), 2);
  EXPECT_EQ(path.states().back(), path.target);
}

TEST(TranspositionPath, ReplayOnRandomPairs) {
  Rng r(11);
  for (int k = 0; k < 1000; ++k) {
    const auto a = Permutation::random(6, r);
    const auto b = Permutation::random(6, r);
    const auto path = transposition_path(a, b);
    EXPECT_EQ(path.length(), cayley_distance(a, b));
    Permutation cur = a;
    for (const auto& t : path.steps) {
      const auto next = apply(t, cur);
      EXPECT_EQ(cayley_distance(cur, next), 1);
      cur = next;
    }
    EXPECT_EQ(cur, b);
  }
}
