#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jladder/errors.hpp"

namespace jladder {

using u64 = std::uint64_t;
using i64 = std::int64_t;

inline constexpr u64 kDefaultSegmentSize = 100'000'000;

inline constexpr u64 isqrt(u64 n) {
  if (n < 2) return n;
  u64 r = 0;
  for (u64 bit = u64{1} << 31; bit != 0; bit >>= 1) {
    const u64 candidate = r | bit;
    if (candidate <= n / candidate) r = candidate;
  }
  return r;
}

// Reference primality test; deliberately shares no code with the sieve.
inline bool trial_division_is_prime(u64 n) {
  if (n < 2) return false;
  if (n < 4) return true;
  if (n % 2 == 0 || n % 3 == 0) return false;
  for (u64 d = 5; d <= n / d; d += 6) {
    if (n % d == 0 || n % (d + 2) == 0) return false;
  }
  return true;
}

// All primes <= limit with a plain (non-segmented) sieve. Used for base primes.
inline std::vector<u64> simple_sieve(u64 limit) {
  std::vector<u64> primes;
  if (limit < 2) return primes;
  std::vector<bool> composite(limit + 1, false);
  for (u64 p = 2; p <= limit; ++p) {
    if (composite[p]) continue;
    primes.push_back(p);
    for (u64 m = p * p; m <= limit; m += p) composite[m] = true;
  }
  return primes;
}

/// Primality of every integer in [lo, hi). Only odd numbers are stored; 2 is a
/// flag of its own.
class PrimalitySegment {
 public:
  u64 lo() const noexcept { return lo_; }
  u64 hi() const noexcept { return hi_; }
  u64 prime_count() const noexcept { return prime_count_; }

  bool is_prime(u64 n) const {
    if (n < lo_ || n >= hi_) {
      throw range_error("position " + std::to_string(n) + " outside segment [" +
                        std::to_string(lo_) + ", " + std::to_string(hi_) + ")");
    }
    if (n == 2) return true;
    if (n % 2 == 0) return false;
    const u64 idx = (n - first_odd_) / 2;
    return (bits_[idx / 64] >> (idx % 64)) & 1U;
  }

  // Calls f(p) for every prime p in [lo, hi) in ascending order.
  template <class F>
  void for_each_prime(F&& f) const {
    if (lo_ <= 2 && hi_ > 2) f(u64{2});
    for (std::size_t w = 0; w < bits_.size(); ++w) {
      u64 word = bits_[w];
      while (word != 0) {
        const auto bit = static_cast<u64>(std::countr_zero(word));
        f(first_odd_ + 2 * (w * 64 + bit));
        word &= word - 1;
      }
    }
  }

 private:
  friend PrimalitySegment sieve_segment(u64 lo, u64 hi, std::span<const u64> base_primes);

  u64 lo_ = 2;
  u64 hi_ = 3;
  u64 first_odd_ = 3;
  u64 prime_count_ = 0;
  std::vector<u64> bits_;
};

namespace detail {

// Smallest prime strictly greater than p, by trial division. Only used to check
// that a base prime list is complete, so p is at most ~10^6 in practice.
inline u64 next_prime_after(u64 p) {
  u64 q = p + 1;
  while (!trial_division_is_prime(q)) ++q;
  return q;
}

inline void require_base_primes(u64 hi, std::span<const u64> base_primes) {
  const u64 needed = isqrt(hi - 1);
  if (needed < 2) return;
  const u64 largest = base_primes.empty() ? 1 : base_primes.back();
  if (largest >= needed) return;
  if (next_prime_after(largest) > needed) return;
  throw contract_error("base primes end at " + std::to_string(largest) +
                       " but sieving below " + std::to_string(hi) + " needs all primes <= " +
                       std::to_string(needed));
}

}  // namespace detail

/// Segmented sieve of [lo, hi). `base_primes` must be ascending and contain every
/// prime <= sqrt(hi - 1); extra primes beyond that are ignored.
inline PrimalitySegment sieve_segment(u64 lo, u64 hi, std::span<const u64> base_primes) {
  if (lo < 2 || lo >= hi) {
    throw contract_error("sieve_segment needs 2 <= lo < hi, got [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + ")");
  }
  detail::require_base_primes(hi, base_primes);

  PrimalitySegment seg;
  seg.lo_ = lo;
  seg.hi_ = hi;
  seg.first_odd_ = lo | 1U;
  const u64 odd_count = seg.first_odd_ < hi ? (hi - seg.first_odd_ + 1) / 2 : 0;
  seg.bits_.assign((odd_count + 63) / 64, ~u64{0});
  if (odd_count % 64 != 0) seg.bits_.back() = (u64{1} << (odd_count % 64)) - 1;

  // Odd multiples of p are 2p apart, i.e. p bit positions apart. Sieve in
  // cache-sized blocks, carrying each prime's next bit index across blocks.
  const u64 sqrt_bound = isqrt(hi - 1);
  std::vector<u64> primes;
  std::vector<u64> next;
  for (u64 p : base_primes) {
    if (p > sqrt_bound) break;
    if (p == 2) continue;
    u64 start = std::max(p * p, (lo + p - 1) / p * p);
    if (start % 2 == 0) start += p;
    primes.push_back(p);
    next.push_back((start - seg.first_odd_) / 2);
  }

  constexpr u64 kBlockBits = u64{1} << 18;
  u64* const bits = seg.bits_.data();
  for (u64 block_lo = 0; block_lo < odd_count; block_lo += kBlockBits) {
    const u64 block_hi = std::min(odd_count, block_lo + kBlockBits);
    for (std::size_t j = 0; j < primes.size(); ++j) {
      const u64 step = primes[j];
      u64 idx = next[j];
      for (; idx < block_hi; idx += step) bits[idx / 64] &= ~(u64{1} << (idx % 64));
      next[j] = idx;
    }
  }

  u64 count = (lo <= 2 && hi > 2) ? 1 : 0;
  for (u64 w : seg.bits_) count += static_cast<u64>(std::popcount(w));
  seg.prime_count_ = count;
  return seg;
}

struct SievePlan {
  u64 limit = 0;
  u64 segment_size = kDefaultSegmentSize;
  std::vector<std::pair<u64, u64>> segments;  // half-open [lo, hi)
};

/// Contiguous segments covering [start, limit].
inline SievePlan make_plan(u64 limit, u64 segment_size = kDefaultSegmentSize, u64 start = 2) {
  if (segment_size == 0) throw contract_error("segment size must be positive");
  if (start < 2) throw contract_error("sieve plans start at 2 or above");
  SievePlan plan{limit, segment_size, {}};
  for (u64 lo = start; lo <= limit;) {
    const u64 hi = (limit - lo < segment_size) ? limit + 1 : lo + segment_size;
    plan.segments.emplace_back(lo, hi);
    lo = hi;
  }
  return plan;
}

// pi(limit).
inline u64 prime_count(u64 limit, u64 segment_size = kDefaultSegmentSize) {
  if (limit < 2) return 0;
  const auto base = simple_sieve(isqrt(limit));
  u64 total = 0;
  for (auto [lo, hi] : make_plan(limit, segment_size).segments) {
    total += sieve_segment(lo, hi, base).prime_count();
  }
  return total;
}

/// pi(x) for every x in `sorted_positions` (ascending), in one sieving pass.
inline std::vector<u64> prime_counts_at(std::span<const u64> sorted_positions,
                                        u64 segment_size = kDefaultSegmentSize) {
  std::vector<u64> out(sorted_positions.size(), 0);
  if (sorted_positions.empty()) return out;
  if (!std::is_sorted(sorted_positions.begin(), sorted_positions.end())) {
    throw contract_error("prime_counts_at needs ascending positions");
  }
  const u64 limit = sorted_positions.back();
  if (limit < 2) return out;
  const auto base = simple_sieve(isqrt(limit));
  std::size_t q = 0;
  while (q < sorted_positions.size() && sorted_positions[q] < 2) ++q;
  u64 running = 0;
  for (auto [lo, hi] : make_plan(limit, segment_size).segments) {
    if (q == sorted_positions.size()) break;
    if (sorted_positions[q] >= hi) {
      running += sieve_segment(lo, hi, base).prime_count();
      continue;
    }
    const auto seg = sieve_segment(lo, hi, base);
    // Interleave the ascending primes with the ascending queries.
    u64 seen = running;
    seg.for_each_prime([&](u64 p) {
      while (q < sorted_positions.size() && sorted_positions[q] < p) out[q++] = seen;
      ++seen;
    });
    while (q < sorted_positions.size() && sorted_positions[q] < hi) out[q++] = seen;
    running += seg.prime_count();
  }
  return out;
}

/// Entry k is pi(lo_k - 1) mod 2 relative to the start of the plan, i.e. the
/// parity of the primes in segments 0..k-1.
inline std::vector<std::uint8_t> segment_parity_prefix(const SievePlan& plan,
                                                       std::span<const u64> per_segment_counts) {
  if (per_segment_counts.size() != plan.segments.size()) {
    throw contract_error("segment_parity_prefix: " + std::to_string(per_segment_counts.size()) +
                         " counts for " + std::to_string(plan.segments.size()) + " segments");
  }
  std::vector<std::uint8_t> parities(per_segment_counts.size());
  std::uint8_t parity = 0;
  for (std::size_t k = 0; k < per_segment_counts.size(); ++k) {
    parities[k] = parity;
    parity ^= static_cast<std::uint8_t>(per_segment_counts[k] & 1U);
  }
  return parities;
}

}  // namespace jladder
