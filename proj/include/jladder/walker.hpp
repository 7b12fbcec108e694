#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "jladder/balance.hpp"
#include "jladder/errors.hpp"
#include "jladder/sieve.hpp"

namespace jladder {

using Level = i64;

/// Cursor of the walk. Position `n` has been visited (its height is `y` and it
/// is included in `crossing_counts`); `parity` is pi(n - 1) mod 2, so the step
/// n -> n+1 goes up iff parity XOR is_prime(n) is 0.
struct WalkerState {
  u64 n = 1;
  i64 y = 0;
  unsigned parity = 0;
  std::map<Level, u64> crossing_counts;

  friend bool operator==(const WalkerState&, const WalkerState&) = default;
};

/// F_level: every position x with y(x) == level, ascending.
struct CrossingRecord {
  Level level = 0;
  std::vector<u64> positions;

  friend bool operator==(const CrossingRecord&, const CrossingRecord&) = default;
};

/// Per-segment shape under an assumed entry parity of 0 and entry height 0.
/// Extrema cover every position in [lo, hi].
struct SegmentSummary {
  u64 lo = 0;
  u64 hi = 0;
  u64 prime_count = 0;
  i64 displacement = 0;
  i64 min_rel = 0;
  i64 max_rel = 0;

  // Same segment entered with parity 1: the walk is mirrored.
  SegmentSummary flipped() const {
    SegmentSummary s = *this;
    s.displacement = -displacement;
    s.min_rel = -max_rel;
    s.max_rel = -min_rel;
    return s;
  }

  friend bool operator==(const SegmentSummary&, const SegmentSummary&) = default;
};

inline WalkerState initial_state() { return WalkerState{}; }

// One unit step from state.n; `current_is_prime` is the primality of state.n.
inline WalkerState step(WalkerState state, bool current_is_prime) {
  state.parity ^= current_is_prime ? 1U : 0U;
  state.y += state.parity == 0 ? 1 : -1;
  state.n += 1;
  if (auto it = state.crossing_counts.find(state.y); it != state.crossing_counts.end()) {
    ++it->second;
  }
  return state;
}

namespace detail {

// Calls f(a, b, y_a, dir) for each maximal straight run of the segment: the
// positions (a, b] have height y_a + dir * (x - a). Runs tile (lo, hi].
template <class F>
void for_each_run(u64 lo, i64 y_lo, unsigned parity, const PrimalitySegment& seg, F&& f) {
  u64 a = lo;
  i64 ya = y_lo;
  int dir = parity == 0 ? 1 : -1;
  auto emit = [&](u64 b) {
    if (b > a) {
      f(a, b, ya, dir);
      ya += dir * static_cast<i64>(b - a);
      a = b;
    }
  };
  seg.for_each_prime([&](u64 p) {
    emit(p);
    dir = -dir;
  });
  emit(seg.hi());
}

inline std::vector<Level> unique_levels(std::span<const Level> levels) {
  std::vector<Level> out;
  for (Level l : levels) {
    if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
  }
  return out;
}

}  // namespace detail

struct SegmentWalk {
  WalkerState exit;
  std::vector<std::vector<u64>> crossings;  // aligned with tracked_levels
  SegmentSummary summary;
  BalanceAccumulator balance;  // points (lo, hi]
};

/// Walks the positions lo+1 .. hi of `seg` starting from `entry` (entry.n == lo).
/// Crossings are reported for x in (lo, hi].
inline SegmentWalk walk_segment(const WalkerState& entry, const PrimalitySegment& seg,
                                std::span<const Level> tracked_levels, bool with_balance = true) {
  if (entry.n != seg.lo()) {
    throw contract_error("walk_segment: entry at n=" + std::to_string(entry.n) +
                         " but segment starts at " + std::to_string(seg.lo()));
  }
  SegmentWalk out;
  out.crossings.resize(tracked_levels.size());
  out.summary.lo = seg.lo();
  out.summary.hi = seg.hi();
  out.summary.prime_count = seg.prime_count();
  const int sign = entry.parity == 0 ? 1 : -1;
  i64 lo_rel = 0, hi_rel = 0;
  i64 y_hi = entry.y;

  detail::for_each_run(entry.n, entry.y, entry.parity, seg, [&](u64 a, u64 b, i64 ya, int dir) {
    const auto len = static_cast<i64>(b - a);
    y_hi = ya + dir * len;
    lo_rel = std::min(lo_rel, y_hi - entry.y);
    hi_rel = std::max(hi_rel, y_hi - entry.y);
    for (std::size_t l = 0; l < tracked_levels.size(); ++l) {
      const i64 k = dir * (tracked_levels[l] - ya);
      if (k > 0 && k <= len) out.crossings[l].push_back(a + static_cast<u64>(k));
    }
    if (with_balance) out.balance.add_run(static_cast<i64>(a) + 1, ya + dir, dir, b - a);
  });

  out.exit = entry;
  out.exit.n = seg.hi();
  out.exit.y = y_hi;
  out.exit.parity ^= static_cast<unsigned>(seg.prime_count() & 1U);
  for (std::size_t l = 0; l < tracked_levels.size(); ++l) {
    out.exit.crossing_counts[tracked_levels[l]] += out.crossings[l].size();
  }
  out.summary.displacement = sign * (y_hi - entry.y);
  out.summary.min_rel = sign == 1 ? lo_rel : -hi_rel;
  out.summary.max_rel = sign == 1 ? hi_rel : -lo_rel;
  return out;
}

// Phase-1 shape of a segment: entry parity 0, entry height 0, no crossings.
inline SegmentSummary summarize_segment(const PrimalitySegment& seg) {
  WalkerState entry;
  entry.n = seg.lo();
  return walk_segment(entry, seg, {}, false).summary;
}

namespace detail {

// Runs job(i) for i in [0, count) on `workers` threads; rethrows the first failure.
template <class Job>
void parallel_for(std::size_t count, unsigned workers, Job&& job) {
  workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

struct WalkResult {
  WalkerState state;
  std::vector<CrossingRecord> records;  // one per tracked level, in tracking order
  BalanceAccumulator balance;           // empty when balance tracking is off
  bool completed = true;                // false if a checkpoint sink asked to stop

  std::vector<Level> levels() const {
    std::vector<Level> out;
    for (const auto& r : records) out.push_back(r.level);
    return out;
  }
  const CrossingRecord& record(Level level) const {
    for (const auto& r : records) {
      if (r.level == level) return r;
    }
    throw range_error("level " + std::to_string(level) + " is not tracked");
  }
};

struct WalkProgress {
  const WalkerState& state;
  std::span<const CrossingRecord> records;
  const BalanceAccumulator& balance;
};

// Invoked at segment boundaries; returning false stops the walk there.
using CheckpointSink = std::function<bool(const WalkProgress&)>;

struct WalkOptions {
  u64 segment_size = kDefaultSegmentSize;
  unsigned workers = 1;
  bool balance = true;
  u64 checkpoint_every = 1;  // segments between sink calls (sequential mode)
  CheckpointSink on_checkpoint;
};

/// The walk after visiting position 1 only: (1, 0), a zero of F_0.
inline WalkResult start_walk(std::span<const Level> levels, bool with_balance = true) {
  WalkResult r;
  r.state = initial_state();
  for (Level l : detail::unique_levels(levels)) {
    r.records.push_back(CrossingRecord{l, {}});
    r.state.crossing_counts[l] = 0;
    if (l == 0) {
      r.records.back().positions.push_back(1);
      r.state.crossing_counts[l] = 1;
    }
  }
  if (with_balance) r.balance.add_point(1, 0);
  return r;
}

namespace detail {

// Position 1 is never sieved: step 1 -> 2 is always up.
inline void walk_prefix(WalkResult& r, u64 limit, bool with_balance) {
  if (r.state.n != 1 || limit < 2) return;
  r.state = step(r.state, false);
  for (auto& rec : r.records) {
    if (rec.level == r.state.y) rec.positions.push_back(r.state.n);
  }
  if (with_balance) r.balance.add_point(static_cast<i64>(r.state.n), r.state.y);
}

inline void append(WalkResult& r, const SegmentWalk& sw) {
  for (std::size_t l = 0; l < r.records.size(); ++l) {
    auto& dst = r.records[l].positions;
    dst.insert(dst.end(), sw.crossings[l].begin(), sw.crossings[l].end());
  }
}

inline void check_limit(const WalkResult& from, u64 limit) {
  if (limit < 1) throw contract_error("walk limit must be >= 1");
  if (limit < from.state.n) {
    throw contract_error("cannot walk to " + std::to_string(limit) + ": already at " +
                         std::to_string(from.state.n));
  }
}

}  // namespace detail

/// Parallel two-phase walk from `from` to `limit`.
///
/// Phase 1 sieves every segment and records its shape under entry parity 0. A
/// sequential prefix pass turns prime counts into entry parities and
/// displacements into entry heights. Phase 2 re-sieves and walks only the
/// segments whose height range can touch a tracked level (all of them when
/// balance tracking is on). The result is identical to the sequential walk.
inline WalkResult parallel_walk(WalkResult from, u64 limit, const WalkOptions& options) {
  detail::check_limit(from, limit);
  from.completed = true;
  detail::walk_prefix(from, limit, options.balance);
  if (from.state.n >= limit) {
    if (options.on_checkpoint) options.on_checkpoint({from.state, from.records, from.balance});
    return from;
  }
  const auto plan = make_plan(limit - 1, options.segment_size, from.state.n);
  const auto base = simple_sieve(isqrt(limit));
  const std::size_t count = plan.segments.size();
  const unsigned workers = std::max(1U, options.workers);

  std::vector<SegmentSummary> summaries(count);
  detail::parallel_for(count, workers, [&](std::size_t i) {
    const auto [lo, hi] = plan.segments[i];
    summaries[i] = summarize_segment(sieve_segment(lo, hi, base));
  });

  std::vector<u64> prime_counts(count);
  for (std::size_t i = 0; i < count; ++i) prime_counts[i] = summaries[i].prime_count;
  const auto parities = segment_parity_prefix(plan, prime_counts);

  const auto levels = from.levels();
  std::vector<WalkerState> entries(count);
  std::vector<char> needs_walk(count, 0);
  i64 y = from.state.y;
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned parity = from.state.parity ^ parities[i];
    const SegmentSummary shape = parity == 0 ? summaries[i] : summaries[i].flipped();
    entries[i].n = plan.segments[i].first;
    entries[i].y = y;
    entries[i].parity = parity;
    bool touches = options.balance;
    for (Level l : levels) touches = touches || (y + shape.min_rel <= l && l <= y + shape.max_rel);
    needs_walk[i] = touches ? 1 : 0;
    y += shape.displacement;
  }

  std::vector<SegmentWalk> walks(count);
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < count; ++i) {
    if (needs_walk[i]) todo.push_back(i);
  }
  detail::parallel_for(todo.size(), workers, [&](std::size_t j) {
    const std::size_t i = todo[j];
    const auto [lo, hi] = plan.segments[i];
    walks[i] = walk_segment(entries[i], sieve_segment(lo, hi, base), levels, options.balance);
  });

  for (std::size_t i = 0; i < count; ++i) {
    if (!needs_walk[i]) continue;
    detail::append(from, walks[i]);
    if (options.balance) from.balance.merge(walks[i].balance);
  }
  from.state.n = limit;
  from.state.y = y;
  from.state.parity ^= static_cast<unsigned>(
      std::accumulate(prime_counts.begin(), prime_counts.end(), u64{0}) & 1U);
  for (const auto& rec : from.records) from.state.crossing_counts[rec.level] = rec.positions.size();
  if (options.on_checkpoint) options.on_checkpoint({from.state, from.records, from.balance});
  return from;
}

/// Continues `from` (a fresh start_walk or a restored checkpoint) up to `limit`.
/// Uses the parallel walk when options.workers > 1.
inline WalkResult continue_walk(WalkResult from, u64 limit, const WalkOptions& options) {
  if (options.workers > 1) return parallel_walk(std::move(from), limit, options);
  detail::check_limit(from, limit);
  from.completed = true;
  detail::walk_prefix(from, limit, options.balance);
  const auto levels = from.levels();
  const u64 every = std::max<u64>(1, options.checkpoint_every);
  if (from.state.n < limit) {
    const auto plan = make_plan(limit - 1, options.segment_size, from.state.n);
    const auto base = simple_sieve(isqrt(limit));
    for (std::size_t i = 0; i < plan.segments.size(); ++i) {
      const auto [lo, hi] = plan.segments[i];
      const auto sw = walk_segment(from.state, sieve_segment(lo, hi, base), levels, options.balance);
      detail::append(from, sw);
      if (options.balance) from.balance.merge(sw.balance);
      from.state = sw.exit;
      const bool last = i + 1 == plan.segments.size();
      if (options.on_checkpoint && (last || (i + 1) % every == 0)) {
        if (!options.on_checkpoint({from.state, from.records, from.balance}) && !last) {
          from.completed = false;
          return from;
        }
      }
    }
  } else if (options.on_checkpoint) {
    options.on_checkpoint({from.state, from.records, from.balance});
  }
  return from;
}

inline WalkResult walk(u64 limit, std::span<const Level> levels, const WalkOptions& options = {}) {
  if (limit < 1) throw contract_error("walk limit must be >= 1");
  return continue_walk(start_walk(levels, options.balance), limit, options);
}

inline WalkResult parallel_walk(u64 limit, std::span<const Level> levels, unsigned workers,
                                WalkOptions options = {}) {
  if (limit < 1) throw contract_error("walk limit must be >= 1");
  if (workers < 1) throw contract_error("worker count must be >= 1");
  options.workers = workers;
  return parallel_walk(start_walk(levels, options.balance), limit, options);
}

/// Heights y(x) at the given ascending positions.
inline std::vector<i64> sample_heights(std::span<const u64> sorted_positions,
                                       u64 segment_size = kDefaultSegmentSize) {
  std::vector<i64> out(sorted_positions.size());
  if (sorted_positions.empty()) return out;
  if (sorted_positions.front() < 1 ||
      !std::is_sorted(sorted_positions.begin(), sorted_positions.end())) {
    throw contract_error("sample_heights needs ascending positions >= 1");
  }
  std::size_t q = 0;
  for (; q < sorted_positions.size() && sorted_positions[q] <= 2; ++q) {
    out[q] = sorted_positions[q] == 1 ? 0 : 1;
  }
  const u64 limit = sorted_positions.back();
  if (q == sorted_positions.size()) return out;
  const auto base = simple_sieve(isqrt(limit));
  WalkerState state;
  state.n = 2;
  state.y = 1;
  for (auto [lo, hi] : make_plan(limit - 1, segment_size, 2).segments) {
    const auto seg = sieve_segment(lo, hi, base);
    if (q < sorted_positions.size() && sorted_positions[q] <= hi) {
      detail::for_each_run(state.n, state.y, state.parity, seg, [&](u64 a, u64 b, i64 ya, int dir) {
        for (; q < sorted_positions.size() && sorted_positions[q] <= b; ++q) {
          out[q] = ya + dir * static_cast<i64>(sorted_positions[q] - a);
        }
      });
    }
    state = walk_segment(state, seg, {}, false).exit;
  }
  return out;
}

/// y(1..limit) as a dense vector (index 0 is position 1).
inline std::vector<i64> heights_upto(u64 limit, u64 segment_size = kDefaultSegmentSize) {
  std::vector<u64> positions(limit);
  std::iota(positions.begin(), positions.end(), u64{1});
  return sample_heights(positions, segment_size);
}

/// Region a walk has covered, for range queries after the fact.
struct WalkContext {
  u64 walked_limit = 1;
  u64 segment_size = kDefaultSegmentSize;

  static WalkContext of(const WalkResult& r, u64 segment_size = kDefaultSegmentSize) {
    return {r.state.n, segment_size};
  }
};

/// Sum over [X, Y] of the prime-to-prime intervals walked upward minus those
/// walked downward (intervals clipped to [X, Y]). Equals y(Y) - y(X).
inline i64 interval_imbalance(u64 from_x, u64 to_y, const WalkContext& ctx) {
  if (from_x < 1 || from_x > to_y || to_y > ctx.walked_limit) {
    throw range_error("interval [" + std::to_string(from_x) + ", " + std::to_string(to_y) +
                      "] outside walked region [1, " + std::to_string(ctx.walked_limit) + "]");
  }
  if (from_x == to_y) return 0;
  i64 total = 0;
  u64 start = from_x;
  if (start == 1) {
    total += 1;  // 1 is not prime and pi(1) = 0
    start = 2;
  }
  if (start == to_y) return total;
  // Direction of the interval starting at `start` is (-1)^pi(start - 1), flipped at each prime.
  int dir = (prime_count(start - 1, ctx.segment_size) & 1U) ? -1 : 1;
  const auto base = simple_sieve(isqrt(to_y));
  u64 interval_start = start;
  for (auto [lo, hi] : make_plan(to_y - 1, ctx.segment_size, start).segments) {
    sieve_segment(lo, hi, base).for_each_prime([&](u64 p) {
      total += dir * static_cast<i64>(p - interval_start);
      interval_start = p;
      dir = -dir;
    });
  }
  total += dir * static_cast<i64>(to_y - interval_start);
  return total;
}

/// Stacked triangles: peak j (from 0) has height 3^j, so every triangle returns
/// to y = 0 while the ladder's slope stays away from 0.
struct TriangleLadder {
  std::vector<Point> points;
};

inline TriangleLadder triangle_ladder(int k) {
  if (k < 1) throw contract_error("triangle_ladder needs k >= 1");
  if (k > 20) throw contract_error("triangle_ladder: k > 20 does not fit in memory");
  TriangleLadder t;
  t.points.push_back({0, 0});
  i64 x = 0;
  i64 height = 1;
  for (int j = 0; j < k; ++j, height *= 3) {
    for (i64 s = 1; s <= height; ++s) t.points.push_back({++x, s});
    for (i64 s = height - 1; s >= 0; --s) t.points.push_back({++x, s});
  }
  return t;
}

}  // namespace jladder
