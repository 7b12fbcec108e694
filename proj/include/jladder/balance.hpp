#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "jladder/errors.hpp"
#include "jladder/int128.hpp"
#include "jladder/sieve.hpp"

namespace jladder {

struct Point {
  i64 x = 0;
  i64 y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Streaming counts, areas and through-origin regression sums over a ladder.
///
/// Areas are kept in half-units: the trapezoid under a unit step from h to h+1
/// has area (|h| + |h+1|) / 2, and since a step never straddles the axis it is
/// attributed wholly to the side of its nonzero endpoint. Each step belongs to
/// the point it ends at, so merging two accumulators adds the step that joins
/// them.
struct BalanceAccumulator {
  u64 c_pos = 0;
  u64 c_neg = 0;
  u64 c_zero = 0;
  i128 a_pos_halfunits = 0;
  i128 a_neg_halfunits = 0;
  i128 sum_x = 0;
  i128 sum_x2 = 0;
  i128 sum_xy = 0;
  std::optional<Point> first;
  std::optional<Point> last;

  u64 points() const noexcept { return c_pos + c_neg + c_zero; }

  void add_point(i64 x, i64 y) {
    if (last) {
      if (x <= last->x) {
        throw invariant_violation("balance: x not increasing at x=" + std::to_string(x));
      }
      add_step(last->y, y, x);
    } else {
      first = Point{x, y};
    }
    count(y);
    sum_x += x;
    sum_x2 += i128{x} * x;
    sum_xy += i128{x} * y;
    last = Point{x, y};
  }

  /// Adds points (x0 + k, y0 + dir * k) for k in [0, count), dir = +-1, x0 >= 0.
  /// Equivalent to `count` calls of add_point but O(1).
  void add_run(i64 x0, i64 y0, int dir, u64 count) {
    if (count == 0) return;
    if (dir != 1 && dir != -1) throw contract_error("balance: run direction must be +-1");
    if (x0 < 0) throw contract_error("balance: add_run needs x0 >= 0");
    add_point(x0, y0);
    if (count == 1) return;

    // Remaining points k = 1..count-1, mirrored so heights increase: u = dir*y.
    const i128 m = static_cast<i128>(count) - 1;
    const i128 u_lo = i128{dir} * y0 + 1;
    const i128 u_hi = u_lo + m - 1;
    i128 neg = 0, zero = 0, pos = 0;
    if (u_hi < 0) {
      neg = m;
    } else if (u_lo > 0) {
      pos = m;
    } else {
      neg = -u_lo;
      zero = 1;
      pos = u_hi;
    }
    // Step ending at height u (coming from u-1) has half-unit area |2u - 1|:
    // positive side for u >= 1, negative side for u <= 0.
    i128 area_up = 0, area_down = 0;
    if (u_hi >= 1) {
      const i128 a = u_lo > 1 ? u_lo : 1;
      area_up = u_hi * u_hi - (a - 1) * (a - 1);
    }
    if (u_lo <= 0) {
      const i128 b = u_hi < 0 ? u_hi : 0;
      area_down = (1 - u_lo) * (1 - u_lo) - b * b;
    }
    if (dir == 1) {
      c_pos += static_cast<u64>(pos);
      c_neg += static_cast<u64>(neg);
      a_pos_halfunits += area_up;
      a_neg_halfunits += area_down;
    } else {
      c_pos += static_cast<u64>(neg);
      c_neg += static_cast<u64>(pos);
      a_pos_halfunits += area_down;
      a_neg_halfunits += area_up;
    }
    c_zero += static_cast<u64>(zero);

    const i128 xa = i128{x0} + 1;
    const i128 xb = i128{x0} + m;
    const i128 s1 = sum_of_integers(xb) - sum_of_integers(xa - 1);
    const i128 s2 = sum_of_squares(xb) - sum_of_squares(xa - 1);
    const i128 intercept = i128{y0} - i128{dir} * x0;  // y = intercept + dir * x
    sum_x += s1;
    sum_x2 += s2;
    sum_xy += intercept * s1 + i128{dir} * s2;
    last = Point{x0 + static_cast<i64>(m), y0 + dir * static_cast<i64>(m)};
  }

  /// Appends `next`, which must cover points strictly to the right of this one.
  void merge(const BalanceAccumulator& next) {
    if (!next.first) return;
    if (!first) {
      *this = next;
      return;
    }
    if (next.first->x <= last->x) {
      throw invariant_violation("balance: merging overlapping ranges");
    }
    add_step(last->y, next.first->y, next.first->x);
    c_pos += next.c_pos;
    c_neg += next.c_neg;
    c_zero += next.c_zero;
    a_pos_halfunits += next.a_pos_halfunits;
    a_neg_halfunits += next.a_neg_halfunits;
    sum_x += next.sum_x;
    sum_x2 += next.sum_x2;
    sum_xy += next.sum_xy;
    last = next.last;
  }

  double a_pos() const { return static_cast<double>(a_pos_halfunits) / 2.0; }
  double a_neg() const { return static_cast<double>(a_neg_halfunits) / 2.0; }

  std::optional<double> count_ratio() const {
    if (c_neg == 0) return std::nullopt;
    return static_cast<double>(c_pos) / static_cast<double>(c_neg);
  }
  std::optional<double> area_ratio() const {
    if (a_neg_halfunits == 0) return std::nullopt;
    return static_cast<double>(a_pos_halfunits) / static_cast<double>(a_neg_halfunits);
  }

  friend bool operator==(const BalanceAccumulator&, const BalanceAccumulator&) = default;

 private:
  static i128 sum_of_integers(i128 n) { return n <= 0 ? 0 : n * (n + 1) / 2; }
  static i128 sum_of_squares(i128 n) { return n <= 0 ? 0 : n * (n + 1) * (2 * n + 1) / 6; }

  void count(i64 y) {
    if (y > 0) {
      ++c_pos;
    } else if (y < 0) {
      ++c_neg;
    } else {
      ++c_zero;
    }
  }

  void add_step(i64 from, i64 to, i64 at_x) {
    const i64 dy = to - from;
    if (dy != 1 && dy != -1) {
      throw invariant_violation("balance: |dy| = " + std::to_string(dy < 0 ? -dy : dy) +
                                " at x=" + std::to_string(at_x));
    }
    const i128 twice_mid = i128{from} + to;
    if (twice_mid > 0) {
      a_pos_halfunits += twice_mid;
    } else {
      a_neg_halfunits -= twice_mid;
    }
  }
};

}  // namespace jladder
