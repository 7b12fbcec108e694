#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "jladder/sieve.hpp"

using namespace jladder;

namespace {

std::vector<u64> primes_in(const PrimalitySegment& seg) {
  std::vector<u64> out;
  seg.for_each_prime([&](u64 p) { out.push_back(p); });
  return out;
}

}  // namespace

TEST(TrialDivision, SmallValues) {
  EXPECT_FALSE(trial_division_is_prime(0));
  EXPECT_FALSE(trial_division_is_prime(1));
  EXPECT_TRUE(trial_division_is_prime(2));
  EXPECT_TRUE(trial_division_is_prime(3));
  EXPECT_FALSE(trial_division_is_prime(91));  // 7 * 13
  EXPECT_TRUE(trial_division_is_prime(97));
  EXPECT_FALSE(trial_division_is_prime(25));
  EXPECT_TRUE(trial_division_is_prime(1'000'000'007));
}

TEST(Isqrt, ExactAroundSquares) {
  for (u64 r : {0ULL, 1ULL, 2ULL, 31622ULL, 31623ULL, 1'000'000ULL, 4'294'967'295ULL}) {
    EXPECT_EQ(isqrt(r * r), r);
    if (r > 0) {
      EXPECT_EQ(isqrt(r * r - 1), r - 1);
    }
  }
}

TEST(SieveSegment, SmallRanges) {
  const std::vector<u64> b1{2, 3, 5};
  const auto s1 = sieve_segment(2, 30, b1);
  EXPECT_EQ(primes_in(s1), (std::vector<u64>{2, 3, 5, 7, 11, 13, 17, 19, 23, 29}));
  EXPECT_EQ(s1.prime_count(), 10U);

  const std::vector<u64> b2{2, 3, 5, 7};
  const auto s2 = sieve_segment(100, 120, b2);
  EXPECT_EQ(primes_in(s2), (std::vector<u64>{101, 103, 107, 109, 113}));
  EXPECT_EQ(s2.prime_count(), 5U);

  const std::vector<u64> b3{2};
  const auto s3 = sieve_segment(3, 4, b3);
  EXPECT_EQ(primes_in(s3), (std::vector<u64>{3}));
  EXPECT_EQ(s3.prime_count(), 1U);
}

TEST(SieveSegment, MissingBasePrimesIsContractViolation) {
  const std::vector<u64> base{2, 3};
  EXPECT_THROW(sieve_segment(2, 100, base), contract_error);  // needs 5 and 7
  EXPECT_THROW(sieve_segment(1, 10, base), contract_error);
  EXPECT_THROW(sieve_segment(10, 10, base), contract_error);
}

TEST(SieveSegment, IsPrimeOutsideRangeThrows) {
  const auto base = simple_sieve(10);
  const auto seg = sieve_segment(50, 60, base);
  EXPECT_THROW(seg.is_prime(49), range_error);
  EXPECT_THROW(seg.is_prime(60), range_error);
  EXPECT_TRUE(seg.is_prime(53));
}

TEST(SieveSegment, AgreesWithTrialDivisionExhaustivelyToOneMillion) {
  const u64 limit = 1'000'000;
  const auto base = simple_sieve(isqrt(limit));
  for (u64 seg_size : {997ULL, 65'536ULL, 1'000'000ULL}) {
    for (auto [lo, hi] : make_plan(limit, seg_size).segments) {
      const auto seg = sieve_segment(lo, hi, base);
      u64 count = 0;
      for (u64 n = lo; n < hi; ++n) {
        const bool p = trial_division_is_prime(n);
        ASSERT_EQ(seg.is_prime(n), p) << "n=" << n << " segment [" << lo << "," << hi << ")";
        count += p;
      }
      ASSERT_EQ(seg.prime_count(), count);
    }
  }
}

TEST(SieveSegment, RandomHighWindowsMatchTrialDivision) {
  std::mt19937_64 rng(7);
  const auto base = simple_sieve(1'000'000);
  for (int trial = 0; trial < 50; ++trial) {
    const u64 lo = 2 + rng() % 1'000'000'000'000ULL;
    const u64 hi = lo + 1 + rng() % 3000;
    const auto seg = sieve_segment(lo, hi, base);
    for (u64 n = lo; n < hi; ++n) ASSERT_EQ(seg.is_prime(n), trial_division_is_prime(n)) << n;
  }
}

TEST(SieveSegment, SplittingComposes) {
  std::mt19937_64 rng(11);
  const auto base = simple_sieve(2000);
  for (int trial = 0; trial < 200; ++trial) {
    const u64 lo = 2 + rng() % 3'000'000;
    const u64 hi = lo + 2 + rng() % 5000;
    const u64 mid = lo + 1 + rng() % (hi - lo - 1);
    EXPECT_EQ(sieve_segment(lo, hi, base).prime_count(),
              sieve_segment(lo, mid, base).prime_count() + sieve_segment(mid, hi, base).prime_count());
  }
}

TEST(SievePlan, CoversRangeContiguously) {
  const auto plan = make_plan(100, 30);
  ASSERT_EQ(plan.segments.size(), 4U);
  EXPECT_EQ(plan.segments.front().first, 2U);
  EXPECT_EQ(plan.segments.back().second, 101U);
  for (std::size_t i = 1; i < plan.segments.size(); ++i) {
    EXPECT_EQ(plan.segments[i].first, plan.segments[i - 1].second);
  }
  EXPECT_TRUE(make_plan(1, 30).segments.empty());
  EXPECT_THROW(make_plan(10, 0), contract_error);
}

TEST(PrimeCount, KnownValues) {
  EXPECT_EQ(prime_count(0), 0U);
  EXPECT_EQ(prime_count(1), 0U);
  EXPECT_EQ(prime_count(2), 1U);
  EXPECT_EQ(prime_count(100), 25U);
  EXPECT_EQ(prime_count(1'000'000), 78'498U);
  EXPECT_EQ(prime_count(1'000'000, 12'345), 78'498U);
}

TEST(PrimeCount, HundredMatchesTrialDivision) {
  u64 count = 0;
  for (u64 n = 0; n <= 100; ++n) count += trial_division_is_prime(n);
  EXPECT_EQ(prime_count(100), count);
}

TEST(PrimeCount, StepsExactlyAtPrimes) {
  std::vector<u64> positions(3000);
  for (u64 i = 0; i < positions.size(); ++i) positions[i] = i;
  const auto pis = prime_counts_at(positions, 257);
  for (u64 n = 1; n < positions.size(); ++n) {
    ASSERT_GE(pis[n], pis[n - 1]);
    ASSERT_EQ(pis[n] == pis[n - 1] + 1, trial_division_is_prime(n)) << n;
  }
}

TEST(PrimeCountsAt, MatchesPrimeCountOnRandomPositions) {
  std::mt19937_64 rng(3);
  std::vector<u64> positions;
  for (int i = 0; i < 40; ++i) positions.push_back(rng() % 2'000'000);
  std::sort(positions.begin(), positions.end());
  const auto pis = prime_counts_at(positions, 100'000);
  for (std::size_t i = 0; i < positions.size(); ++i) EXPECT_EQ(pis[i], prime_count(positions[i]));
}

TEST(SegmentParityPrefix, Examples) {
  SievePlan two{39, 30, {{2, 30}, {30, 40}}};
  const std::vector<u64> c1{10, 5};
  EXPECT_EQ(segment_parity_prefix(two, c1), (std::vector<std::uint8_t>{0, 0}));

  SievePlan empty{1, 30, {}};
  EXPECT_TRUE(segment_parity_prefix(empty, std::vector<u64>{}).empty());

  SievePlan three{0, 1, {{2, 3}, {3, 4}, {4, 5}}};
  EXPECT_EQ(segment_parity_prefix(three, std::vector<u64>{4, 4, 2}), (std::vector<std::uint8_t>{0, 0, 0}));
  EXPECT_EQ(segment_parity_prefix(three, std::vector<u64>{3, 4, 2}), (std::vector<std::uint8_t>{0, 1, 1}));
}

TEST(SegmentParityPrefix, LengthMismatchThrows) {
  SievePlan two{39, 30, {{2, 30}, {30, 40}}};
  EXPECT_THROW(segment_parity_prefix(two, std::vector<u64>{1}), contract_error);
}

TEST(SegmentParityPrefix, EqualsParityOfPiBeforeEachSegment) {
  const auto plan = make_plan(50'000, 777);
  const auto base = simple_sieve(isqrt(50'000));
  std::vector<u64> counts;
  for (auto [lo, hi] : plan.segments) counts.push_back(sieve_segment(lo, hi, base).prime_count());
  const auto parities = segment_parity_prefix(plan, counts);
  for (std::size_t k = 0; k < plan.segments.size(); ++k) {
    ASSERT_EQ(parities[k], prime_count(plan.segments[k].first - 1) % 2) << k;
  }
}
