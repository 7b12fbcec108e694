#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jladder/balance.hpp"
#include "jladder/errors.hpp"
#include "jladder/sieve.hpp"
#include "jladder/walker.hpp"

namespace jladder {

// ---------------------------------------------------------------------------
// Gaps between consecutive crossings

struct GapHistogram {
  std::map<u64, u64> counts;
  u64 total_gaps = 0;
  u64 max_gap = 0;

  void add(u64 gap, u64 times = 1) {
    counts[gap] += times;
    total_gaps += times;
    max_gap = std::max(max_gap, gap);
  }
  u64 count(u64 gap) const {
    auto it = counts.find(gap);
    return it == counts.end() ? 0 : it->second;
  }
};

inline GapHistogram gap_histogram(std::span<const u64> positions) {
  if (positions.size() < 2) {
    throw insufficient_data_error("gap histogram needs at least 2 crossings, got " +
                                  std::to_string(positions.size()));
  }
  GapHistogram h;
  for (std::size_t i = 1; i < positions.size(); ++i) {
    if (positions[i] <= positions[i - 1]) {
      throw contract_error("crossing positions must be strictly increasing");
    }
    h.add(positions[i] - positions[i - 1]);
  }
  return h;
}

inline GapHistogram gap_histogram(const CrossingRecord& record) {
  return gap_histogram(std::span<const u64>(record.positions));
}

struct ExpDecayFit {
  double amplitude = 0;  // count ~ amplitude * exp(-rate * gap)
  double rate = 0;
  double r_squared = 0;
  u64 min_gap = 0;
  u64 max_gap = 0;
  std::size_t points = 0;
};

/// Unweighted least squares of ln(count) against gap size over gaps <= cutoff.
inline ExpDecayFit exp_decay_fit(const GapHistogram& hist, u64 max_gap_cutoff = 1000) {
  std::vector<std::pair<double, double>> xy;
  for (auto [gap, count] : hist.counts) {
    if (gap > max_gap_cutoff) break;
    if (count > 0) xy.emplace_back(static_cast<double>(gap), std::log(static_cast<double>(count)));
  }
  if (xy.size() < 3) {
    throw insufficient_data_error("exponential fit needs >= 3 distinct gaps <= " +
                                  std::to_string(max_gap_cutoff) + ", got " +
                                  std::to_string(xy.size()));
  }
  const double n = static_cast<double>(xy.size());
  double mx = 0, my = 0;
  for (auto [x, y] : xy) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (auto [x, y] : xy) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  const double slope = sxy / sxx;
  ExpDecayFit fit;
  fit.rate = -slope;
  fit.amplitude = std::exp(my - slope * mx);
  fit.r_squared = syy == 0 ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  fit.min_gap = static_cast<u64>(xy.front().first);
  fit.max_gap = static_cast<u64>(xy.back().first);
  fit.points = xy.size();
  return fit;
}

// Top-k gaps by count; ties go to the smaller gap.
inline std::vector<std::pair<u64, u64>> jumping_champions(const GapHistogram& hist, std::size_t k) {
  if (k < 1) throw contract_error("jumping_champions needs k >= 1");
  std::vector<std::pair<u64, u64>> all(hist.counts.begin(), hist.counts.end());
  std::stable_sort(all.begin(), all.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (all.size() > k) all.resize(k);
  return all;
}

/// Two readings of "average gap": gamma = sum of gaps / number of gaps and
/// xi = interval size / number of crossings, each also with the other divisor.
struct AverageGap {
  double gamma = 0;
  double xi = 0;
  double gamma_per_crossing = 0;  // sum of gaps / number of crossings
  double xi_per_gap = 0;          // interval size / number of gaps
  u64 crossings = 0;
  u64 sum_of_gaps = 0;
  u64 interval = 0;

  // Which of the four values, if any, lies within `rel_tol` of `reported`.
  std::optional<std::string> matching(double reported, double rel_tol = 0.01) const {
    const std::pair<const char*, double> candidates[] = {
        {"gamma", gamma}, {"gamma_per_crossing", gamma_per_crossing}, {"xi", xi}, {"xi_per_gap", xi_per_gap}};
    for (auto [name, value] : candidates) {
      if (std::abs(value - reported) <= rel_tol * std::abs(reported)) return std::string(name);
    }
    return std::nullopt;
  }
};

inline AverageGap average_gap(std::span<const u64> positions, u64 interval_limit) {
  if (positions.size() < 2) {
    throw insufficient_data_error("average gap needs at least 2 crossings");
  }
  if (interval_limit < positions.back()) {
    throw contract_error("interval limit " + std::to_string(interval_limit) +
                         " is below the last crossing " + std::to_string(positions.back()));
  }
  AverageGap g;
  g.crossings = positions.size();
  g.sum_of_gaps = positions.back() - positions.front();
  g.interval = interval_limit;
  const double gaps = static_cast<double>(positions.size() - 1);
  const double crossings = static_cast<double>(positions.size());
  g.gamma = static_cast<double>(g.sum_of_gaps) / gaps;
  g.gamma_per_crossing = static_cast<double>(g.sum_of_gaps) / crossings;
  g.xi = static_cast<double>(interval_limit) / crossings;
  g.xi_per_gap = static_cast<double>(interval_limit) / gaps;
  return g;
}

// ---------------------------------------------------------------------------
// Digits

inline std::array<double, 9> benford_expected() {
  std::array<double, 9> p{};
  for (int d = 1; d <= 9; ++d) p[d - 1] = std::log10(1.0 + 1.0 / d);
  return p;
}

inline int leading_digit(u64 v) {
  if (v == 0) throw contract_error("leading digit of 0 is undefined");
  while (v >= 10) v /= 10;
  return static_cast<int>(v);
}

struct LeadingDigitReport {
  u64 total = 0;
  std::array<u64, 9> counts{};
  std::array<double, 9> observed{};
  std::array<double, 9> expected{};
  double l1_distance = 0;
  double chi_square = 0;  // sum over d of (O_d - E_d)^2 / E_d, in counts
};

inline LeadingDigitReport benford_histogram(std::span<const u64> positions) {
  if (positions.empty()) throw insufficient_data_error("Benford analysis needs at least 1 crossing");
  LeadingDigitReport r;
  r.total = positions.size();
  r.expected = benford_expected();
  for (u64 p : positions) ++r.counts[leading_digit(p) - 1];
  const double n = static_cast<double>(r.total);
  for (int d = 0; d < 9; ++d) {
    r.observed[d] = static_cast<double>(r.counts[d]) / n;
    r.l1_distance += std::abs(r.observed[d] - r.expected[d]);
    const double e = r.expected[d] * n;
    r.chi_square += (static_cast<double>(r.counts[d]) - e) * (static_cast<double>(r.counts[d]) - e) / e;
  }
  return r;
}

/// Ordinary least squares y = a + b x with standard errors.
struct LinearFit {
  double a = 0;
  double b = 0;
  double se_a = 0;
  double se_b = 0;
};

inline LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 3) {
    throw insufficient_data_error("linear fit needs >= 3 aligned points");
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, sx2 = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    sx2 += xs[i] * xs[i];
  }
  LinearFit f;
  f.b = sxy / sxx;
  f.a = my - f.b * mx;
  double rss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (f.a + f.b * xs[i]);
    rss += r * r;
  }
  const double s2 = rss / (n - 2);
  f.se_b = std::sqrt(s2 / sxx);
  f.se_a = std::sqrt(s2 * sx2 / (n * sxx));
  return f;
}

inline constexpr std::array<int, 5> kOddDigits{1, 3, 5, 7, 9};

struct LastDigitReport {
  u64 total = 0;
  std::array<u64, 5> counts{};     // for digits 1, 3, 5, 7, 9
  std::array<double, 5> percent{};
  LinearFit fit;  // percent = a + b * digit
};

/// Last decimal digit of each level-0 crossing. Every such crossing is odd, so
/// an even position means the record is corrupt.
inline LastDigitReport last_digit_histogram(std::span<const u64> positions) {
  if (positions.empty()) throw insufficient_data_error("last-digit analysis needs at least 1 crossing");
  LastDigitReport r;
  r.total = positions.size();
  for (u64 p : positions) {
    const int d = static_cast<int>(p % 10);
    if (d % 2 == 0) {
      throw invariant_violation("even crossing " + std::to_string(p) + " at level 0");
    }
    ++r.counts[static_cast<std::size_t>(d / 2)];
  }
  std::array<double, 5> xs{};
  for (std::size_t i = 0; i < 5; ++i) {
    r.percent[i] = 100.0 * static_cast<double>(r.counts[i]) / static_cast<double>(r.total);
    xs[i] = kOddDigits[i];
  }
  r.fit = linear_fit(xs, r.percent);
  return r;
}

// ---------------------------------------------------------------------------
// Slope and balance

/// Through-origin slope b = sum(x y) / sum(x^2) over every `decimation`-th point
/// (points 0, d, 2d, ...).
inline double slope_fit(std::span<const Point> points, std::size_t decimation = 1) {
  if (decimation < 1) throw contract_error("decimation must be >= 1");
  long double sxy = 0, sxx = 0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < points.size(); i += decimation, ++used) {
    sxy += static_cast<long double>(points[i].x) * points[i].y;
    sxx += static_cast<long double>(points[i].x) * points[i].x;
  }
  if (used < 2) throw insufficient_data_error("slope fit needs >= 2 points after decimation");
  if (sxx == 0) throw insufficient_data_error("slope fit: all points at x = 0");
  return static_cast<double>(sxy / sxx);
}

inline double slope_of(const BalanceAccumulator& acc) {
  if (acc.points() < 2 || acc.sum_x2 == 0) throw insufficient_data_error("slope needs >= 2 points");
  return static_cast<double>(static_cast<long double>(acc.sum_xy) / static_cast<long double>(acc.sum_x2));
}

/// Slope over each prefix of `points` ending at index m*every - 1 (and the full
/// set), as (points used, slope) pairs.
inline std::vector<std::pair<std::size_t, double>> slope_series(std::span<const Point> points,
                                                                 std::size_t every = 1) {
  if (every < 1) throw contract_error("series stride must be >= 1");
  std::vector<std::pair<std::size_t, double>> out;
  long double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    sxy += static_cast<long double>(points[i].x) * points[i].y;
    sxx += static_cast<long double>(points[i].x) * points[i].x;
    const std::size_t used = i + 1;
    if (used >= 2 && sxx > 0 && (used % every == 0 || used == points.size())) {
      out.emplace_back(used, static_cast<double>(sxy / sxx));
    }
  }
  return out;
}

inline BalanceAccumulator balance(std::span<const Point> points) {
  BalanceAccumulator acc;
  for (const auto& p : points) acc.add_point(p.x, p.y);
  return acc;
}

inline constexpr const char* kRatioModelFormula = "c_pos/c_neg - 1";

struct SlopeModels {
  double inv_pi = 0;
  double inv_sqrt_pi = 0;
  double diff_over_n = 0;
  std::optional<double> ratio_based;  // undefined when c_neg = 0
};

inline SlopeModels slope_models(u64 limit, const BalanceAccumulator& acc, u64 pi_n) {
  if (pi_n == 0) throw contract_error("slope models need pi(n) > 0");
  if (limit == 0) throw contract_error("slope models need n > 0");
  SlopeModels m;
  m.inv_pi = 1.0 / static_cast<double>(pi_n);
  m.inv_sqrt_pi = 1.0 / std::sqrt(static_cast<double>(pi_n));
  m.diff_over_n = (static_cast<double>(acc.c_pos) - static_cast<double>(acc.c_neg)) / static_cast<double>(limit);
  if (auto r = acc.count_ratio()) m.ratio_based = *r - 1.0;
  return m;
}

// ---------------------------------------------------------------------------
// Primes among the crossings

/// Primality of a fixed, sparse set of positions, sieved in windows around
/// clusters of nearby positions. Queries outside the set throw range_error.
class SievedPrimality {
 public:
  explicit SievedPrimality(std::span<const u64> positions, u64 window = 1'000'000) {
    std::vector<u64> sorted(positions.begin(), positions.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    if (sorted.empty()) return;
    const auto base = simple_sieve(isqrt(sorted.back()));
    std::size_t i = 0;
    while (i < sorted.size()) {
      if (sorted[i] < 2) {
        prime_[sorted[i]] = false;
        ++i;
        continue;
      }
      const u64 lo = sorted[i];
      std::size_t j = i;
      while (j + 1 < sorted.size() && sorted[j + 1] - lo < window) ++j;
      const auto seg = sieve_segment(lo, sorted[j] + 1, base);
      for (; i <= j; ++i) prime_[sorted[i]] = seg.is_prime(sorted[i]);
    }
  }

  bool is_prime(u64 n) const {
    auto it = prime_.find(n);
    if (it == prime_.end()) throw range_error("primality of " + std::to_string(n) + " not sieved");
    return it->second;
  }

 private:
  std::map<u64, bool> prime_;
};

struct PrimesInZeroes {
  u64 zeroes = 0;
  u64 primes = 0;
  double x_over_log_x = std::numeric_limits<double>::quiet_NaN();  // X / ln X, X = zeroes
  double diff_percent = std::numeric_limits<double>::quiet_NaN();  // (primes - X/ln X) / primes
};

template <class PrimalitySource>
PrimesInZeroes primes_in_zeroes(std::span<const u64> positions, const PrimalitySource& source) {
  PrimesInZeroes r;
  r.zeroes = positions.size();
  for (u64 p : positions) r.primes += source.is_prime(p) ? 1 : 0;
  if (r.zeroes >= 2) {
    const double x = static_cast<double>(r.zeroes);
    r.x_over_log_x = x / std::log(x);
    if (r.primes > 0) {
      r.diff_percent = 100.0 * (static_cast<double>(r.primes) - r.x_over_log_x) / static_cast<double>(r.primes);
    }
  }
  return r;
}

inline PrimesInZeroes primes_in_zeroes(std::span<const u64> positions) {
  return primes_in_zeroes(positions, SievedPrimality(positions));
}

// ---------------------------------------------------------------------------
// Growth of Z(n) and gap shares

struct GrowthRow {
  u64 n = 0;
  u64 zeroes = 0;
  double sqrt_n = 0;
  double cbrt_n = 0;
  std::optional<u64> pi_n;
  bool within_band = false;  // cbrt(n) <= Z(n) <= sqrt(n)
};

struct GrowthCheckpoint {
  u64 n = 0;
  u64 zeroes = 0;
  std::optional<u64> pi_n;
};

inline std::vector<GrowthRow> zero_growth_report(std::span<const GrowthCheckpoint> checkpoints) {
  std::vector<GrowthRow> rows;
  for (const auto& c : checkpoints) {
    GrowthRow r;
    r.n = c.n;
    r.zeroes = c.zeroes;
    r.sqrt_n = std::sqrt(static_cast<double>(c.n));
    r.cbrt_n = std::cbrt(static_cast<double>(c.n));
    r.pi_n = c.pi_n;
    const auto z = static_cast<double>(c.zeroes);
    r.within_band = z >= r.cbrt_n && z <= r.sqrt_n;
    rows.push_back(r);
  }
  return rows;
}

/// Z(n) at each n in `ns` (ascending) read off a crossing record, with pi(n)
/// filled in when `with_pi` is set.
inline std::vector<GrowthCheckpoint> growth_checkpoints(std::span<const u64> positions,
                                                        std::span<const u64> ns, bool with_pi) {
  std::vector<GrowthCheckpoint> out;
  std::vector<u64> pis;
  if (with_pi) pis = prime_counts_at(ns);
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const auto z = static_cast<u64>(std::upper_bound(positions.begin(), positions.end(), ns[i]) -
                                    positions.begin());
    GrowthCheckpoint c{ns[i], z, std::nullopt};
    if (with_pi) c.pi_n = pis[i];
    out.push_back(c);
  }
  return out;
}

// Powers of ten from 10 up to `limit`, plus `limit` itself if it is not one.
inline std::vector<u64> decade_points(u64 limit) {
  std::vector<u64> ns;
  for (u64 p = 10; p <= limit; p *= 10) {
    ns.push_back(p);
    if (p > std::numeric_limits<u64>::max() / 10) break;
  }
  if (ns.empty() || ns.back() != limit) ns.push_back(limit);
  return ns;
}

struct ThresholdShare {
  u64 threshold = 0;
  double below_percent = 0;    // gaps < threshold
  double at_most_percent = 0;  // gaps <= threshold
};

struct GapPercentageReport {
  u64 total_gaps = 0;
  std::vector<std::pair<u64, double>> selected;  // gap, percent of all gaps
  double selected_total_percent = 0;
  std::vector<ThresholdShare> thresholds;
};

inline GapPercentageReport gap_percentage_report(const GapHistogram& hist,
                                                 std::span<const u64> gaps = std::array<u64, 4>{4, 8, 12, 16},
                                                 std::span<const u64> thresholds = std::array<u64, 2>{60, 100}) {
  if (hist.total_gaps == 0) throw insufficient_data_error("gap percentages need a non-empty histogram");
  GapPercentageReport r;
  r.total_gaps = hist.total_gaps;
  const double total = static_cast<double>(hist.total_gaps);
  for (u64 g : gaps) {
    const double pct = 100.0 * static_cast<double>(hist.count(g)) / total;
    r.selected.emplace_back(g, pct);
    r.selected_total_percent += pct;
  }
  for (u64 t : thresholds) {
    u64 below = 0, at_most = 0;
    for (auto [gap, count] : hist.counts) {
      if (gap < t) below += count;
      if (gap <= t) at_most += count;
    }
    r.thresholds.push_back({t, 100.0 * static_cast<double>(below) / total,
                            100.0 * static_cast<double>(at_most) / total});
  }
  return r;
}

struct GapShareRow {
  u64 zeroes = 0;
  std::vector<double> percent;  // aligned with the requested gaps
};

/// Share of each requested gap among the gaps of the first Z crossings, for Z
/// on a 1-2-5 grid and at the end of the record.
inline std::vector<GapShareRow> gap_share_series(std::span<const u64> positions,
                                                 std::span<const u64> gaps = std::array<u64, 3>{4, 8, 12}) {
  std::vector<GapShareRow> rows;
  if (positions.size() < 2) return rows;
  std::vector<u64> grid;
  for (u64 decade = 10; decade < positions.size(); decade *= 10) {
    for (u64 m : {1, 2, 5}) {
      if (decade * m < positions.size()) grid.push_back(decade * m);
    }
  }
  grid.push_back(positions.size());
  std::vector<u64> seen(gaps.size(), 0);
  std::size_t g = 0;
  for (std::size_t i = 1; i < positions.size() && g < grid.size(); ++i) {
    const u64 gap = positions[i] - positions[i - 1];
    for (std::size_t k = 0; k < gaps.size(); ++k) seen[k] += gap == gaps[k] ? 1 : 0;
    if (i + 1 == grid[g]) {
      GapShareRow row{grid[g], {}};
      for (u64 s : seen) row.percent.push_back(100.0 * static_cast<double>(s) / static_cast<double>(i));
      rows.push_back(std::move(row));
      ++g;
    }
  }
  return rows;
}

}  // namespace jladder
