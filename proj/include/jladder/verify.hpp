#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "jladder/sieve.hpp"
#include "jladder/walker.hpp"

namespace jladder {

/// y(1..limit) by literal unit steps, asking `is_prime` about every n. The
/// oracle side of every walk-equivalence check.
inline std::vector<i64> naive_heights(u64 limit, const std::function<bool(u64)>& is_prime) {
  std::vector<i64> heights;
  if (limit == 0) return heights;
  heights.reserve(limit);
  WalkerState s = initial_state();
  heights.push_back(s.y);
  while (s.n < limit) {
    s = step(s, is_prime(s.n));
    heights.push_back(s.y);
  }
  return heights;
}

inline std::vector<u64> zeroes_of(const std::vector<i64>& heights) {
  std::vector<u64> z;
  for (std::size_t i = 0; i < heights.size(); ++i) {
    if (heights[i] == 0) z.push_back(i + 1);
  }
  return z;
}

struct VerifyOptions {
  u64 segment_size = 10'000;
  unsigned workers = 2;
  // Test hook: the oracle reports the opposite primality for this n.
  std::optional<u64> corrupt_primality_at;
};

struct VerifyReport {
  bool ok = true;
  std::string failed;  // name of the first invariant that did not hold
  std::string detail;
  std::vector<std::string> passed;
  std::vector<u64> zeroes;
};

inline constexpr u64 kVerifyMaxLimit = 1'000'000;

/// Structural checks on the walk up to `limit` (<= 10^6, the oracle is trial
/// division). Stops at the first failure.
inline VerifyReport verify_invariants(u64 limit, const VerifyOptions& opt = {}) {
  if (limit < 1 || limit > kVerifyMaxLimit) {
    throw contract_error("verify limit must be in [1, " + std::to_string(kVerifyMaxLimit) + "]");
  }
  VerifyReport rep;
  auto fail = [&](std::string name, std::string detail) {
    rep.ok = false;
    rep.failed = std::move(name);
    rep.detail = std::move(detail);
    return rep;
  };

  const auto oracle = naive_heights(limit, [&](u64 n) {
    const bool p = trial_division_is_prime(n);
    return opt.corrupt_primality_at == n ? !p : p;
  });
  const auto segmented = heights_upto(limit, opt.segment_size);
  for (u64 i = 0; i < limit; ++i) {
    if (oracle[i] != segmented[i]) {
      return fail("oracle_equivalence", "y(" + std::to_string(i + 1) + ") = " + std::to_string(segmented[i]) +
                                            " but trial-division walk gives " + std::to_string(oracle[i]));
    }
  }
  rep.passed.push_back("oracle_equivalence");

  std::vector<u64> positions(limit);
  for (u64 i = 0; i < limit; ++i) positions[i] = i + 1;
  const auto pis = prime_counts_at(positions, opt.segment_size);
  for (u64 i = 0; i + 1 < limit; ++i) {
    const i64 expected = (pis[i] & 1U) ? -1 : 1;
    if (segmented[i + 1] - segmented[i] != expected) {
      return fail("step_rule", "y(" + std::to_string(i + 2) + ") - y(" + std::to_string(i + 1) +
                                   ") != (-1)^pi(" + std::to_string(i + 1) + ")");
    }
  }
  rep.passed.push_back("step_rule");

  for (u64 i = 0; i < limit; ++i) {
    const i64 y = segmented[i];
    if (((y % 2) + 2) % 2 != static_cast<i64>(i % 2)) {
      return fail("height_parity", "y(" + std::to_string(i + 1) + ") has the wrong parity");
    }
  }
  rep.passed.push_back("height_parity");

  const auto result = walk(limit, std::vector<Level>{0}, WalkOptions{opt.segment_size, 1, true, 1, {}});
  rep.zeroes = result.record(0).positions;
  if (rep.zeroes != zeroes_of(segmented)) {
    return fail("crossing_record", "walk() zero list differs from the zeroes of the height sequence");
  }
  rep.passed.push_back("crossing_record");

  for (u64 z : rep.zeroes) {
    if (z != 1 && z % 4 != 3) return fail("zero_form", "zero " + std::to_string(z) + " is not 3 mod 4");
  }
  rep.passed.push_back("zero_form");

  std::size_t twos = 0;
  for (std::size_t i = 1; i < rep.zeroes.size(); ++i) {
    const u64 gap = rep.zeroes[i] - rep.zeroes[i - 1];
    if (gap == 2) {
      ++twos;
    } else if (gap % 4 != 0) {
      return fail("zero_gaps", "gap " + std::to_string(gap) + " after " + std::to_string(rep.zeroes[i - 1]));
    }
  }
  if (rep.zeroes.size() >= 2 && twos != 1) {
    return fail("zero_gaps", "gap 2 occurs " + std::to_string(twos) + " times");
  }
  rep.passed.push_back("zero_gaps");

  const auto par = walk(limit, std::vector<Level>{0}, WalkOptions{opt.segment_size, opt.workers, true, 1, {}});
  if (par.records != result.records || !(par.state == result.state) || !(par.balance == result.balance)) {
    return fail("parallel_equivalence", "parallel walk differs from the sequential walk");
  }
  rep.passed.push_back("parallel_equivalence");
  return rep;
}

}  // namespace jladder
