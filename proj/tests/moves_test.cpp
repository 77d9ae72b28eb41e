#include <gtest/gtest.h>

#include <bit>
#include <cstdint>
#include <map>
#include <queue>
#include <random>
#include <set>

#include "oracles.hpp"
#include "safactor/moves.hpp"

namespace safactor {
namespace {

FactorConfig cfg_of(std::uint64_t v, bool freeze_lowest = false) {
  return FactorConfig::from_value(BigUint{v}, freeze_lowest);
}

std::uint64_t value_of(const FactorConfig& c) { return *c.value().to_u64(); }

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

TEST(FactorConfigTest, RejectsInconsistentShape) {
  EXPECT_THROW(FactorConfig(BigUint{5}, 4, 2), std::invalid_argument);   // 101b has 3 digits
  EXPECT_THROW(FactorConfig(BigUint{5}, 3, 3), std::invalid_argument);   // popcount is 2
  EXPECT_THROW(FactorConfig(BigUint{6}, 3, 2, true), std::invalid_argument);  // even with frozen low digit
  std::mt19937_64 rng(1);
  EXPECT_THROW(FactorConfig::random(4, 0, rng), std::invalid_argument);
  EXPECT_THROW(FactorConfig::random(4, 5, rng), std::invalid_argument);
  EXPECT_THROW(FactorConfig::random(4, 1, rng, true), std::invalid_argument);
}

TEST(FactorConfigTest, RandomIsUniformOverCell) {
  std::mt19937_64 rng(3);
  std::map<std::uint64_t, int> counts;
  constexpr int kDraws = 100000;
  for (int i = 0; i < kDraws; ++i) {
    const auto c = FactorConfig::random(6, 3, rng);
    ASSERT_EQ(c.len(), 6U);
    ASSERT_EQ(c.value().popcount(), 3U);
    ++counts[value_of(c)];
  }
  ASSERT_EQ(counts.size(), binomial(5, 2));
  for (const auto& [v, n] : counts) EXPECT_NEAR(static_cast<double>(n) / kDraws, 0.1, 0.01) << v;
}

TEST(SwapTest, ExplicitSwap) {
  auto c = cfg_of(0b1010);
  c.swap_digits(2, 1);
  EXPECT_EQ(value_of(c), 0b1001U);
}

TEST(SwapTest, OnlyLegalSwapOnThreeDigits) {
  // Exhaustive: 110b has one 1 and one 0 below the leading digit.
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(value_of(swap_move(cfg_of(0b110), rng)), 0b101U);
}

TEST(SwapTest, FrozenPositionsThrow) {
  auto c = cfg_of(0b1011, true);
  EXPECT_THROW(c.swap_digits(4, 2), std::out_of_range);
  EXPECT_THROW(c.swap_digits(1, 2), std::out_of_range);
  EXPECT_NO_THROW(c.swap_digits(2, 3));
}

TEST(ReverseTest, ExplicitRangeMatchesOracle) {
  auto c = cfg_of(0b1100);
  c.reverse(1, 3);
  EXPECT_EQ(value_of(c), 0b1001U);
  EXPECT_EQ(oracle::reverse_oracle(0b1100, 1, 3), 0b1001U);
}

TEST(ReverseTest, SingleDigitRangeIsIdentity) {
  auto c = cfg_of(0b10110);
  c.reverse(2, 2);
  EXPECT_EQ(value_of(c), 0b10110U);
}

TEST(SlideTest, RotateDownMatchesOracle) {
  // Digits 1..4 of 10110b are 0,1,1,0; the digit at 1 moves to 4.
  auto c = cfg_of(0b10110);
  c.rotate_down(1, 4);
  EXPECT_EQ(value_of(c), oracle::rotate_down_oracle(0b10110, 1, 4));
  EXPECT_EQ(value_of(c), 0b10011U);
}

TEST(SlideTest, AllRangesMatchOracle) {
  for (std::uint64_t v = 2; v < 512; ++v) {
    const std::size_t len = BigUint{v}.bit_length();
    for (std::size_t lo = 1; lo < len; ++lo) {
      for (std::size_t hi = lo; hi < len; ++hi) {
        auto s = cfg_of(v);
        s.rotate_down(lo, hi);
        ASSERT_EQ(value_of(s), oracle::rotate_down_oracle(v, lo, hi));
        auto r = cfg_of(v);
        r.reverse(lo, hi);
        ASSERT_EQ(value_of(r), oracle::reverse_oracle(v, lo, hi));
      }
    }
  }
}

TEST(RandomMoveTest, AllOnesRegionUnchanged) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(value_of(random_move(cfg_of(0b1111111), rng)), 0b1111111U);
}

TEST(RandomMoveTest, TouchesAtMostAQuarterOfPositions) {
  std::mt19937_64 rng(9);
  const std::uint64_t start = 0b1010110010110011001ULL;  // 19 digits, 18 mutable
  const std::size_t limit = random_move_max_subset(18);
  EXPECT_EQ(limit, 5U);
  bool moved = false;
  for (int i = 0; i < 5000; ++i) {
    const auto out = random_move(cfg_of(start), rng);
    const auto changed = static_cast<std::size_t>(std::popcount(value_of(out) ^ start));
    ASSERT_LE(changed, limit);
    moved = moved || changed > 0;
  }
  EXPECT_TRUE(moved);
}

TEST(ProposeTest, DegenerateConfigsUnchanged) {
  std::mt19937_64 rng(2);
  for (const MoveKind k : kAllMoveKinds) {
    EXPECT_EQ(value_of(propose(cfg_of(1), k, rng)), 1U);
    EXPECT_EQ(value_of(propose(cfg_of(0b1000), k, rng)), 0b1000U);  // mutable region all zeros
    EXPECT_EQ(value_of(propose(cfg_of(0b1111), k, rng)), 0b1111U);
  }
}

TEST(ProposeTest, RandomProposalsPreserveInvariants) {
  std::mt19937_64 rng(2025);
  int violations = 0;
  for (int i = 0; i < 100000; ++i) {
    const std::size_t len = 1 + rng() % 70;
    const std::size_t ones = 1 + rng() % len;
    const bool freeze = (rng() % 4) == 0 && ones >= 2;
    const auto before = FactorConfig::random(len, ones, rng, freeze);
    const MoveKind kind = kAllMoveKinds[rng() % 4];
    const auto after = propose(before, kind, rng);
    const bool ok = after.len() == len && after.value().bit_length() == len &&
                    after.value().popcount() == ones && after.digit(len) &&
                    (!before.lowest_frozen() || after.digit(1));
    violations += ok ? 0 : 1;
  }
  EXPECT_EQ(violations, 0);
}

TEST(ProposeTest, EachKindCanMove) {
  std::mt19937_64 rng(6);
  for (const MoveKind k : kAllMoveKinds) {
    bool changed = false;
    for (int i = 0; i < 200 && !changed; ++i) changed = value_of(propose(cfg_of(0b100110), k, rng)) != 0b100110U;
    EXPECT_TRUE(changed) << to_string(k);
  }
}

TEST(SwapTest, ReachesEveryConfigurationInCell) {
  std::mt19937_64 rng(77);
  for (std::size_t len = 1; len <= 8; ++len) {
    for (std::size_t ones = 1; ones <= len; ++ones) {
      std::set<std::uint64_t> seen;
      std::queue<std::uint64_t> frontier;
      const auto start = value_of(FactorConfig::random(len, ones, rng));
      seen.insert(start);
      frontier.push(start);
      while (!frontier.empty()) {
        const auto v = frontier.front();
        frontier.pop();
        for (int i = 0; i < 200; ++i) {
          const auto next = value_of(swap_move(cfg_of(v), rng));
          if (seen.insert(next).second) frontier.push(next);
        }
      }
      EXPECT_EQ(seen.size(), binomial(len - 1, ones - 1)) << "len=" << len << " ones=" << ones;
    }
  }
}

TEST(MoveMixTest, DefaultIsUniform) {
  std::mt19937_64 rng(10);
  MoveMix mix;
  std::map<MoveKind, int> counts;
  for (int i = 0; i < 40000; ++i) ++counts[mix(rng)];
  for (const MoveKind k : kAllMoveKinds) EXPECT_NEAR(counts[k] / 40000.0, 0.25, 0.015);
}

TEST(MoveMixTest, ZeroWeightNeverDrawn) {
  std::mt19937_64 rng(10);
  MoveMix mix({1.0, 0.0, 3.0, 0.0});
  for (int i = 0; i < 10000; ++i) {
    const MoveKind k = mix(rng);
    ASSERT_TRUE(k == MoveKind::swap || k == MoveKind::reverse);
  }
  EXPECT_THROW(MoveMix({0.0, 0.0, 0.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(MoveMix({-1.0, 1.0, 1.0, 1.0}), std::invalid_argument);
}

TEST(WordConfigTest, PrimitivesMatchGenericConfig) {
  for (std::uint64_t v = 2; v < 1024; ++v) {
    const std::size_t len = BigUint{v}.bit_length();
    const WordConfig w0 = WordConfig::from_value(BigUint{v});
    const FactorConfig f0 = cfg_of(v);
    ASSERT_EQ(w0.mutable_count(), f0.mutable_count());
    for (std::size_t r = 0; r < f0.mutable_ones(); ++r) ASSERT_EQ(w0.nth_mutable(true, r), f0.nth_mutable(true, r));
    for (std::size_t r = 0; r < f0.mutable_count() - f0.mutable_ones(); ++r) {
      ASSERT_EQ(w0.nth_mutable(false, r), f0.nth_mutable(false, r));
    }
    for (std::size_t lo = 1; lo < len; ++lo) {
      for (std::size_t hi = lo; hi < len; ++hi) {
        auto w = w0;
        auto f = f0;
        w.rotate_down(lo, hi);
        f.rotate_down(lo, hi);
        ASSERT_EQ(w.word(), value_of(f));
        w = w0;
        f = f0;
        w.reverse(lo, hi);
        f.reverse(lo, hi);
        ASSERT_EQ(w.word(), value_of(f));
        w = w0;
        f = f0;
        w.swap_digits(lo, hi);
        f.swap_digits(lo, hi);
        ASSERT_EQ(w.word(), value_of(f));
      }
    }
  }
}

TEST(WordConfigTest, SameRandomStreamSameProposals) {
  std::mt19937_64 shape(12);
  for (int i = 0; i < 20000; ++i) {
    const std::size_t len = 1 + shape() % 64;
    const std::size_t ones = 1 + shape() % len;
    const bool freeze = ones >= 2 && shape() % 3 == 0;
    const std::uint64_t seed = shape();
    std::mt19937_64 r1(seed);
    std::mt19937_64 r2(seed);
    const auto f = FactorConfig::random(len, ones, r1, freeze);
    const auto w = WordConfig::random(len, ones, r2, freeze);
    ASSERT_EQ(w.word(), value_of(f));
    const MoveKind kind = kAllMoveKinds[static_cast<std::size_t>(i) % 4];
    ASSERT_EQ(propose(w, kind, r2).word(), value_of(propose(f, kind, r1))) << to_string(kind);
    ASSERT_EQ(r1(), r2());
  }
}

TEST(WordConfigTest, RejectsOversizedValues) {
  EXPECT_THROW(WordConfig::from_value(BigUint{1} << 64), std::invalid_argument);
  EXPECT_FALSE(WordConfig::feasible(65, 3));
  EXPECT_THROW(WordConfig(5, 3, 3), std::invalid_argument);
  auto w = WordConfig::from_value(BigUint{0b1011}, true);
  EXPECT_THROW(w.swap_digits(1, 2), std::out_of_range);
}

}  // namespace
}  // namespace safactor
