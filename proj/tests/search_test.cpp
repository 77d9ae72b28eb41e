#include <gtest/gtest.h>

#include <set>
#include <tuple>

#include "oracles.hpp"
#include "safactor/search.hpp"

namespace safactor {
namespace {

using Cell = std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>;

// Independent cell listing: every (a, b) with a >= b >= floor and a + b in {n, n + 1}.
std::set<Cell> cells_oracle(std::size_t n, std::size_t floor_bits) {
  std::set<Cell> out;
  for (std::size_t a = 1; a <= n; ++a) {
    for (std::size_t b = 1; b <= a; ++b) {
      if (b < floor_bits || (a + b != n && a + b != n + 1)) continue;
      for (std::size_t a1 = 1; a1 <= a; ++a1) {
        for (std::size_t b1 = 1; b1 <= b; ++b1) out.emplace(a, b, a1, b1);
      }
    }
  }
  return out;
}

AnnealParams quick_params() {
  AnnealParams p;
  p.configs_scale = 200;
  p.max_steps = 2000;
  return p;
}

SearchPolicy hinted(const char* hint, std::uint64_t seed = 1) {
  SearchPolicy p;
  p.hint = SearchHint::parse(hint);
  p.master_seed = seed;
  return p;
}

TEST(EnumerateTest, TwentyDigitTargetHasTwoHundredTenCells) {
  const auto tasks = enumerate_tasks(20, SearchPolicy{});
  EXPECT_EQ(tasks.size(), 210U);
}

TEST(EnumerateTest, EachCellExactlyOnce) {
  for (std::size_t n = 2; n <= 24; ++n) {
    for (const std::size_t floor_bits : {std::size_t{1}, std::size_t{3}, std::size_t{10}}) {
      SearchPolicy policy;
      policy.min_factor_bits = floor_bits;
      for (const TaskOrder order : {TaskOrder::heuristic, TaskOrder::lexicographic}) {
        policy.order = order;
        const auto tasks = enumerate_tasks(n, policy);
        std::set<Cell> got;
        for (std::size_t i = 0; i < tasks.size(); ++i) {
          const auto& t = tasks[i];
          ASSERT_EQ(t.index, i);
          ASSERT_TRUE(got.emplace(t.a, t.b, t.a_ones, t.b_ones).second) << "duplicate cell at n=" << n;
        }
        ASSERT_EQ(got, cells_oracle(n, floor_bits)) << "n=" << n << " floor=" << floor_bits;
      }
    }
  }
}

TEST(EnumerateTest, HeuristicOrderPutsBalancedLengthsFirst) {
  SearchPolicy policy;
  policy.min_factor_bits = 1;
  const auto tasks = enumerate_tasks(24, policy);
  for (std::size_t i = 1; i < tasks.size(); ++i) {
    const auto gap = [](const SearchTask& t) { return t.a - t.b; };
    ASSERT_LE(gap(tasks[i - 1]), gap(tasks[i]));
  }
}

TEST(EnumerateTest, HintRestrictsCells) {
  const auto one = enumerate_tasks(60, hinted("a=30,b=30,a1=16,b1=18"));
  ASSERT_EQ(one.size(), 1U);
  EXPECT_EQ(std::tie(one[0].a, one[0].b, one[0].a_ones, one[0].b_ones),
            std::make_tuple(std::size_t{30}, std::size_t{30}, std::size_t{16}, std::size_t{18}));
  EXPECT_TRUE(enumerate_tasks(60, hinted("a=5,b=5")).empty());
  EXPECT_EQ(enumerate_tasks(20, hinted("a1=7-8,b1=8")).size(), 4U);  // (10,10) and (11,10), two a1 values each
}

TEST(EnumerateTest, SeedsDependOnIndexAndDepth) {
  SearchPolicy policy;
  policy.master_seed = 5;
  const auto d0 = enumerate_tasks(20, policy, 0);
  const auto d1 = enumerate_tasks(20, policy, 1);
  std::set<std::uint64_t> seeds;
  for (std::size_t i = 0; i < d0.size(); ++i) {
    ASSERT_EQ(d0[i].seed, derive_seed(5, i, 0));
    seeds.insert(d0[i].seed);
    seeds.insert(d1[i].seed);
  }
  EXPECT_EQ(seeds.size(), 2 * d0.size());
}

TEST(SearchHintTest, ParseErrors) {
  EXPECT_NO_THROW(SearchHint::parse("a=29,b=28-30"));
  for (const char* bad : {"a", "a=", "x=3", "a=3-2", "a=0", "a=1,a=2x", "a=-3"}) {
    EXPECT_THROW(SearchHint::parse(bad), std::invalid_argument) << bad;
  }
}

TEST(ScalingTest, Examples) {
  EXPECT_EQ(scaling_estimate(57, 10000, 50000), BigUint::from_decimal("300846028500000000"));
  EXPECT_EQ(scaling_estimate(57, 41, 50000), BigUint::from_decimal("1233468716850000"));
  EXPECT_THROW(scaling_estimate(1, 1, 1), std::domain_error);
}

TEST(ScalingTest, DoublingDigitsMultipliesByThirtyTwo) {
  for (std::uint64_t n = 2; n < 500; ++n) {
    ASSERT_EQ(scaling_estimate(2 * n, 7, 11), scaling_estimate(n, 7, 11) * BigUint{32});
  }
}

TEST(FactorOnceTest, SplitsSmallSemiprime) {
  const auto r = factor_once(BigUint{1022117}, hinted("a=10,b=10"), quick_params());
  ASSERT_TRUE(r.split);
  EXPECT_EQ(r.split->a, BigUint{1013});
  EXPECT_EQ(r.split->b, BigUint{1009});
  EXPECT_EQ(r.split->a * r.split->b, BigUint{1022117});
  EXPECT_EQ(r.task_count, 100U);
}

TEST(FactorOnceTest, SplitsSquare) {
  const auto r = factor_once(BigUint{1018081}, hinted("a=10,b=10,a1=7,b1=7"), quick_params());
  ASSERT_TRUE(r.split);
  EXPECT_EQ(r.split->a, BigUint{1009});
  EXPECT_EQ(r.split->b, BigUint{1009});
}

TEST(FactorOnceTest, PrimeTargetFails) {
  AnnealParams p;
  p.configs_scale = 2;
  p.max_steps = 20;
  const auto r = factor_once(BigUint{1000003}, SearchPolicy{}, p);
  EXPECT_FALSE(r.split);
  EXPECT_GT(r.configurations_tried, 0U);
}

TEST(FactorOnceTest, DeadlineStopsSearch) {
  SearchPolicy policy;
  policy.deadline_seconds = 0.05;
  const auto r = factor_once(BigUint{1000003}, policy, AnnealParams{});
  EXPECT_FALSE(r.split);
  EXPECT_TRUE(r.timed_out);
  EXPECT_LT(r.wall_seconds, 5.0);
}

TEST(FactorOnceTest, ParallelMatchesSerial) {
  for (const Schedule schedule : {Schedule::interleaved, Schedule::sequential}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      SearchPolicy serial = hinted("a=10,b=10,a1=6-8,b1=7-8", seed);
      serial.schedule = schedule;
      SearchPolicy parallel = serial;
      parallel.worker_count = 3;
      const auto x = factor_once(BigUint{1022117}, serial, quick_params());
      const auto y = factor_once(BigUint{1022117}, parallel, quick_params());
      ASSERT_TRUE(x.split);
      ASSERT_TRUE(y.split);
      EXPECT_EQ(x.split->a, y.split->a);
      EXPECT_EQ(x.split->b, y.split->b);
      if (schedule == Schedule::interleaved) {
        // Rounds are synchronous, so the winner and its step count agree too.
        EXPECT_EQ(x.split->task.index, y.split->task.index);
        EXPECT_EQ(x.split->steps_used, y.split->steps_used);
      }
    }
  }
}

TEST(FactorizeTest, TrialDivisionOnly) {
  const auto f = factorize(BigUint{30}, SearchPolicy{}, AnnealParams{});
  EXPECT_TRUE(f.tree.complete());
  EXPECT_EQ(f.tree.leaves(LeafKind::prime), (std::vector<BigUint>{BigUint{2}, BigUint{3}, BigUint{5}}));
  EXPECT_TRUE(f.splits.empty());
  EXPECT_EQ(f.configurations_tried, 0U);
}

TEST(FactorizeTest, PrimeInputIsSingleLeaf) {
  const auto f = factorize(BigUint::from_decimal("18446744073709551557"), SearchPolicy{}, AnnealParams{});
  EXPECT_TRUE(f.tree.complete());
  EXPECT_TRUE(f.tree.is_leaf());
  EXPECT_THROW(factorize(BigUint{1}, SearchPolicy{}, AnnealParams{}), std::domain_error);
}

TEST(FactorizeTest, SmallFactorsThenAnnealing) {
  const auto f = factorize(BigUint{8 * 1022117}, hinted("a=10,b=10"), quick_params());
  ASSERT_TRUE(f.tree.complete());
  EXPECT_EQ(f.tree.leaves(LeafKind::prime), (std::vector<BigUint>{BigUint{2}, BigUint{2}, BigUint{2},
                                                                  BigUint{1009}, BigUint{1013}}));
  ASSERT_EQ(f.splits.size(), 1U);
  EXPECT_EQ(f.splits[0].value, BigUint{1022117});
}

TEST(FactorizeTest, FailureStaysInTree) {
  AnnealParams p;
  p.configs_scale = 1;
  p.max_steps = 2;
  const auto f = factorize(BigUint{2 * 1022117}, hinted("a=10,b=10,a1=1,b1=1"), p);
  EXPECT_FALSE(f.tree.complete());
  EXPECT_EQ(f.tree.leaves(LeafKind::failed), (std::vector<BigUint>{BigUint{1022117}}));
  EXPECT_EQ(f.tree.leaves(LeafKind::prime), (std::vector<BigUint>{BigUint{2}}));
}

TEST(FactorizeTest, SemiprimeModeLeavesCompositeParts) {
  // 1009 * (1013 * 1019); the 20-digit part has 11 ones.
  const BigUint n{1009ULL * 1013ULL * 1019ULL};
  ASSERT_EQ(oracle::popcount_divmod(std::uint64_t{1013 * 1019}), 11U);
  SearchPolicy policy = hinted("a=20,b=10,a1=11,b1=7");
  policy.semiprime_mode = true;
  const auto f = factorize(n, policy, quick_params());
  EXPECT_FALSE(f.tree.complete());
  EXPECT_EQ(f.tree.leaves(LeafKind::prime), (std::vector<BigUint>{BigUint{1009}}));
  EXPECT_EQ(f.tree.leaves(LeafKind::unsplit), (std::vector<BigUint>{BigUint{1013 * 1019}}));
  EXPECT_EQ(f.splits.size(), 1U);
}

TEST(FactorizeTest, TreeProductIdentity) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto f = factorize(BigUint{6 * 1022117}, hinted("a=10,b=10", seed), quick_params());
    BigUint product{1};
    f.tree.for_each_leaf([&](const FactorTree& leaf) { product = product * leaf.value; });
    EXPECT_EQ(product, BigUint{6 * 1022117});
    for (const BigUint& p : f.tree.leaves(LeafKind::prime)) EXPECT_TRUE(is_prime(p));
  }
}

TEST(FactorizeTest, SameSeedSameResult) {
  const auto x = factorize(BigUint{1022117}, hinted("a=10,b=10", 9), quick_params());
  const auto y = factorize(BigUint{1022117}, hinted("a=10,b=10", 9), quick_params());
  ASSERT_EQ(x.splits.size(), y.splits.size());
  EXPECT_EQ(x.configurations_tried, y.configurations_tried);
  EXPECT_EQ(x.splits[0].steps_used, y.splits[0].steps_used);
  EXPECT_EQ(x.splits[0].task.index, y.splits[0].task.index);
}

}  // namespace
}  // namespace safactor
