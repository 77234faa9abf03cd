#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "gl0/constraint.hpp"
#include "gl0/error.hpp"
#include "oracles.hpp"

namespace {

using gl0::BoxParams;
using gl0::GroupPartition;
using gl0::StationarityMethod;

constexpr double kInf = std::numeric_limits<double>::infinity();

BoxParams box(double beta) {
  BoxParams b;
  b.beta = beta;
  return b;
}

GroupPartition two_by_two() { return GroupPartition({2, 2}, {2, 1}, 2); }
GroupPartition two_singletons() { return GroupPartition({1, 1}, {1, 1}, 1); }

TEST(Partition, RejectsBadInput) {
  EXPECT_THROW(GroupPartition({}, {}, 1), gl0::Error);
  EXPECT_THROW(GroupPartition({0}, {1}, 1), gl0::Error);
  EXPECT_THROW(GroupPartition({1}, {0}, 1), gl0::Error);
  EXPECT_THROW(GroupPartition({1}, {1}, 0), gl0::Error);
  EXPECT_THROW(GroupPartition({1, 1}, {1}, 1), gl0::Error);
  EXPECT_THROW(GroupPartition({1}, {kInf}, 1), gl0::Error);
}

TEST(Partition, OversizedGroupStaysZero) {
  const GroupPartition part({1, 2}, {3, 1}, 2);
  EXPECT_EQ(part.dim(), 3U);
  const std::vector<double> w{5, 1, 1};
  const auto x = gl0::project(w, part, box(kInf));
  EXPECT_EQ(x, (std::vector<double>{0, 1, 1}));
  const std::vector<double> bad{1, 0, 0};
  EXPECT_FALSE(gl0::is_feasible(bad, part, box(kInf)));
}

TEST(Partition, StripOversizedKeepsIndexMap) {
  const auto s = GroupPartition::strip_oversized({1, 2, 3}, {5, 1, 2}, 3);
  EXPECT_EQ(s.partition.groups(), 2U);
  EXPECT_EQ(s.retained, (std::vector<std::size_t>{1, 2}));
}

TEST(Partition, SparsityBudget) {
  EXPECT_DOUBLE_EQ(GroupPartition::budget_for_sparsity(0.4, 10), 6.0);
  EXPECT_THROW(GroupPartition::budget_for_sparsity(1.0, 10), gl0::Error);
  EXPECT_THROW(GroupPartition::budget_for_sparsity(0.0, 10), gl0::Error);
}

TEST(Feasible, Examples) {
  const auto part = two_by_two();
  EXPECT_TRUE(gl0::is_feasible(std::vector<double>{0, 0, 0, 0}, part, box(1)));
  EXPECT_TRUE(gl0::is_feasible(std::vector<double>{1, 0.5, 0, 0}, part, box(1)));
  EXPECT_FALSE(gl0::is_feasible(std::vector<double>{1, 0, 0, 0.5}, part, box(1)));
  EXPECT_FALSE(gl0::is_feasible(std::vector<double>{1.5, 0, 0, 0}, part, box(1)));
  EXPECT_THROW((void)gl0::is_feasible(std::vector<double>{1, 0}, part, box(1)), gl0::Error);
}

TEST(Feasible, ExactZeroSemantics) {
  const auto part = two_singletons();
  const std::vector<double> tiny{1e-300, 1e-300};
  EXPECT_FALSE(gl0::is_feasible(tiny, part, box(kInf)));
  const std::vector<double> neg_zero{-0.0, 1};
  EXPECT_TRUE(gl0::is_feasible(neg_zero, part, box(kInf)));
}

TEST(Project, KeepsHigherGainGroup) {
  const auto part = two_by_two();
  const std::vector<double> w{3, 0.5, 1, 1};
  const auto proj = gl0::project_detailed(w, part, box(1));
  EXPECT_DOUBLE_EQ(proj.gains[0], 5.25);
  EXPECT_DOUBLE_EQ(proj.gains[1], 2.0);
  EXPECT_EQ(proj.point, (std::vector<double>{1, 0.5, 0, 0}));
}

TEST(Project, MemberIsFixed) {
  const auto part = two_by_two();
  const std::vector<double> w{0.25, -1, 0, 0};
  EXPECT_EQ(gl0::project(w, part, box(1)), w);
}

TEST(Project, UnboundedBox) {
  const auto part = two_singletons();
  const std::vector<double> w{2, -3};
  EXPECT_EQ(gl0::project(w, part, box(kInf)), (std::vector<double>{0, -3}));
}

TEST(Project, MatchesSupportEnumeration) {
  gl0::Stream rng(21);
  const double betas[] = {0.5, 1.0, kInf};
  for (int t = 0; t < 300; ++t) {
    const auto part = gl0::testing::random_partition(rng, 1 + rng.uniform_index(10), 4, t % 2);
    const double beta = betas[t % 3];
    std::vector<double> w(part.dim());
    for (double& x : w) x = rng.uniform(-2.0, 2.0);
    const auto x = gl0::project(w, part, box(beta));
    double sq = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) sq += (w[j] - x[j]) * (w[j] - x[j]);
    const double ref = gl0::testing::brute_projection_sq_distance(w, part, beta);
    ASSERT_NEAR(sq, ref, 1e-9 * std::max(1.0, ref)) << "instance " << t;
    ASSERT_TRUE(gl0::is_feasible(x, part, box(beta)));
  }
}

TEST(Project, IdempotentBitExact) {
  gl0::Stream rng(22);
  for (int t = 0; t < 200; ++t) {
    const auto part = gl0::testing::random_partition(rng, 1 + rng.uniform_index(12), 4);
    std::vector<double> w(part.dim());
    for (double& x : w) x = rng.normal();
    const BoxParams b = box(t % 2 ? 0.7 : kInf);
    const auto once = gl0::project(w, part, b);
    EXPECT_EQ(gl0::project(once, part, b), once);
  }
}

TEST(Closedness, PerturbationAndZeroingPreserveFeasibility) {
  gl0::Stream rng(23);
  for (int t = 0; t < 200; ++t) {
    const auto part = gl0::testing::random_partition(rng, 1 + rng.uniform_index(8), 3);
    auto w = gl0::testing::random_feasible_point(rng, part, kInf);
    ASSERT_TRUE(gl0::is_feasible(w, part, box(kInf)));
    for (double delta : {1e-3, 1e-9, 1e-15}) {
      auto v = w;
      for (double& x : v) {
        if (x != 0.0) x += delta * (x > 0 ? 1 : -1);
      }
      EXPECT_TRUE(gl0::is_feasible(v, part, box(kInf)));
    }
    const std::size_t g = rng.uniform_index(part.groups());
    for (std::size_t j = 0; j < part.size(g); ++j) w[part.offset(g) + j] = 0.0;
    EXPECT_TRUE(gl0::is_feasible(w, part, box(kInf)));
  }
}

TEST(IndexSets, ZeroPoint) {
  const auto part = two_singletons();
  const auto s = gl0::index_sets(std::vector<double>{0, 0}, part, true);
  EXPECT_TRUE(s.nonzero.empty());
  EXPECT_EQ(s.addable, (std::vector<std::size_t>{0, 1}));
  ASSERT_TRUE(s.maximal.has_value());
  EXPECT_EQ(*s.maximal, (std::vector<std::vector<std::size_t>>{{0}, {1}}));
}

TEST(IndexSets, NoExtension) {
  const auto part = two_singletons();
  const auto s = gl0::index_sets(std::vector<double>{0.5, 0}, part, true);
  EXPECT_EQ(s.nonzero, (std::vector<std::size_t>{0}));
  EXPECT_TRUE(s.addable.empty());
  EXPECT_EQ(*s.maximal, (std::vector<std::vector<std::size_t>>{{0}}));
  EXPECT_TRUE(s.closed_form());
}

TEST(IndexSets, RejectsInfeasible) {
  EXPECT_THROW(gl0::index_sets(std::vector<double>{1, 1}, two_singletons()), gl0::Error);
}

TEST(IndexSets, MaximalFamilyMatchesEnumeration) {
  gl0::Stream rng(24);
  for (int t = 0; t < 200; ++t) {
    const auto part = gl0::testing::random_partition(rng, 1 + rng.uniform_index(9), 2, t % 2);
    const auto w = gl0::testing::random_feasible_point(rng, part, kInf);
    const auto s = gl0::index_sets(w, part, true);
    const auto ref = gl0::testing::brute_maximal_sets(w, part);
    ASSERT_EQ(s.maximal->size(), ref.size());
    for (std::size_t k = 0; k < ref.size(); ++k) {
      std::uint64_t mask = 0;
      for (auto i : (*s.maximal)[k]) mask |= std::uint64_t{1} << i;
      EXPECT_NE(std::find(ref.begin(), ref.end(), mask), ref.end());
    }
    for (auto i : s.nonzero) EXPECT_EQ(std::count(s.addable.begin(), s.addable.end(), i), 0);
  }
}

TEST(Stationarity, ZeroGradient) {
  const auto part = two_singletons();
  EXPECT_EQ(gl0::stationarity_distance(std::vector<double>{0, 0}, std::vector<double>{0.5, 0},
                                       part, box(1)),
            0.0);
}

TEST(Stationarity, ClosedFormExample) {
  const auto part = two_singletons();
  const std::vector<double> w{0.5, 0}, g{0.3, 0.7};
  for (auto m : {StationarityMethod::automatic, StationarityMethod::integer_program,
                 StationarityMethod::enumerate}) {
    EXPECT_NEAR(gl0::stationarity_distance(g, w, part, box(1), m), 0.3, 1e-15);
  }
}

TEST(Stationarity, IntegerProgramExample) {
  const auto part = two_singletons();
  const std::vector<double> w{0, 0}, g{0.3, 0.7};
  EXPECT_NEAR(gl0::stationarity_distance(g, w, part, box(1)), 0.3, 1e-15);
  EXPECT_NEAR(gl0::stationarity_distance(g, w, part, box(1), StationarityMethod::enumerate),
              0.3, 1e-15);
}

TEST(Stationarity, BoundaryComponentPushingOutIsFree) {
  const GroupPartition part({1}, {1}, 1);
  const std::vector<double> w{1};
  EXPECT_EQ(gl0::stationarity_distance(std::vector<double>{-0.5}, w, part, box(1)), 0.0);
  EXPECT_DOUBLE_EQ(gl0::stationarity_distance(std::vector<double>{0.5}, w, part, box(1)), 0.5);
}

TEST(Stationarity, AllRoutesAgreeWithBruteForce) {
  gl0::Stream rng(25);
  for (int t = 0; t < 300; ++t) {
    const auto part = gl0::testing::random_partition(rng, 1 + rng.uniform_index(10), 3, t % 3 != 0);
    const double beta = t % 2 ? 1.0 : kInf;
    const auto w = gl0::testing::random_feasible_point(rng, part, beta);
    std::vector<double> g(part.dim());
    for (double& x : g) x = rng.normal();
    const double ref = gl0::testing::brute_stationarity(g, w, part, beta);
    const double enumerated =
        gl0::stationarity_distance(g, w, part, box(beta), StationarityMethod::enumerate);
    ASSERT_NEAR(enumerated, ref, 1e-9) << t;
    if (part.integer_form()) {
      ASSERT_NEAR(gl0::stationarity_distance(g, w, part, box(beta)), ref, 1e-9) << t;
      ASSERT_NEAR(gl0::stationarity_distance(g, w, part, box(beta),
                                             StationarityMethod::integer_program),
                  ref, 1e-9)
          << t;
    }
  }
}

TEST(Stationarity, IntegerProgramRejectsIrrationalPenalties) {
  const GroupPartition part({1, 1, 1}, {std::sqrt(2.0), 1.0, 1.0}, 2.5);
  const std::vector<double> w{0, 0, 0}, g{1, 1, 1};
  EXPECT_THROW(gl0::stationarity_distance(g, w, part, box(kInf),
                                          StationarityMethod::integer_program),
               gl0::Error);
}

TEST(Frechet, SignRules) {
  const GroupPartition part({1}, {1}, 1);
  const std::vector<double> w{1};
  EXPECT_TRUE(gl0::frechet_cone_contains(std::vector<double>{0}, w, part, box(1)));
  EXPECT_TRUE(gl0::frechet_cone_contains(std::vector<double>{0.5}, w, part, box(1)));
  EXPECT_FALSE(gl0::frechet_cone_contains(std::vector<double>{-0.5}, w, part, box(1)));
}

TEST(Frechet, ContainedInLimitingCone) {
  gl0::Stream rng(26);
  int hits = 0;
  for (int t = 0; t < 2000; ++t) {
    const auto part = gl0::testing::random_partition(rng, 1 + rng.uniform_index(6), 2);
    const double beta = t % 2 ? 1.0 : kInf;
    const auto w = gl0::testing::random_feasible_point(rng, part, beta);
    std::vector<double> y(part.dim());
    for (double& x : y) x = rng.uniform01() < 0.5 ? 0.0 : rng.normal();
    if (!gl0::frechet_cone_contains(y, w, part, box(beta))) continue;
    ++hits;
    std::vector<double> g(y.size());
    for (std::size_t j = 0; j < y.size(); ++j) g[j] = -y[j];
    ASSERT_EQ(gl0::stationarity_distance(g, w, part, box(beta),
                                         StationarityMethod::enumerate),
              0.0);
  }
  EXPECT_GT(hits, 50);
}

}  // namespace
