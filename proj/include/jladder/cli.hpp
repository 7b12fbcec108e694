#pragma once

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jladder/errors.hpp"
#include "jladder/sieve.hpp"
#include "jladder/stats.hpp"
#include "jladder/store.hpp"
#include "jladder/verify.hpp"
#include "jladder/walker.hpp"

namespace jladder::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kIo = 2, kInvariant = 3 };

inline constexpr const char* kWorkersEnv = "JLADDER_WORKERS";

struct RunConfig {
  u64 limit = 0;
  std::vector<Level> levels{0};
  u64 segment_size = kDefaultSegmentSize;
  unsigned workers = 1;
  std::string out_dir = ".";
  std::string checkpoint_path;  // empty: <out_dir>/checkpoint.json
  u64 checkpoint_every = 1;
  bool resume = false;
  bool balance = true;
};

inline unsigned default_workers() {
  if (const char* env = std::getenv(kWorkersEnv)) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

namespace detail {

inline std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

inline std::string opt_value(const std::optional<double>& v) {
  return v ? csv_number(*v) : std::string("undefined");
}

}  // namespace detail

inline int cmd_walk(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.limit < 1) throw contract_error("--limit must be >= 1");
  if (cfg.levels.empty()) throw contract_error("at least one --level is required");
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  const fs::path cp_path = cfg.checkpoint_path.empty() ? dir / "checkpoint.json" : fs::path(cfg.checkpoint_path);
  const auto levels = jladder::detail::unique_levels(cfg.levels);

  WalkOptions opt;
  opt.segment_size = cfg.segment_size;
  opt.workers = cfg.workers;
  opt.balance = cfg.balance;
  opt.checkpoint_every = cfg.checkpoint_every;
  opt.on_checkpoint = directory_checkpoint_sink(dir, cp_path, cfg.segment_size, cfg.balance, cfg.limit);

  WalkResult start;
  if (cfg.resume && fs::exists(cp_path)) {
    const auto cp = read_checkpoint(cp_path, plan_hash(cfg.segment_size, levels));
    if (cp.has_balance != cfg.balance) throw incompatible_checkpoint("checkpoint balance setting differs");
    std::vector<CrossingRecord> records;
    for (Level l : cp.levels()) {
      const fs::path p = dir / crossing_file_name(l);
      records.push_back(fs::exists(p) ? read_zero_list(p) : CrossingRecord{l, {}});
      records.back().level = l;
    }
    start = restore_walk(cp, std::move(records));
    err << "resuming from n=" << cp.state.n << "\n";
  } else {
    start = start_walk(levels, cfg.balance);
  }

  const auto t0 = std::chrono::steady_clock::now();
  const auto result = continue_walk(std::move(start), cfg.limit, opt);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!result.completed) throw io_error("walk stopped before reaching the limit");

  out << "limit=" << cfg.limit << " y=" << result.state.y << " parity=" << result.state.parity << "\n";
  for (const auto& rec : result.records) {
    const u64 count = rec.positions.size();
    const bool has_one = !rec.positions.empty() && rec.positions.front() == 1;
    out << "level=" << rec.level << " crossings=" << count;
    if (rec.level == 0) out << " zeroes=" << count << " zeroes_excluding_1=" << (has_one ? count - 1 : count);
    out << " last=" << (rec.positions.empty() ? std::string("none") : std::to_string(rec.positions.back()))
        << " file=" << (dir / crossing_file_name(rec.level)).string() << "\n";
  }
  if (cfg.balance) {
    const auto& b = result.balance;
    out << "c_pos=" << b.c_pos << " c_neg=" << b.c_neg << " c_zero=" << b.c_zero
        << " count_ratio=" << detail::opt_value(b.count_ratio()) << " area_ratio=" << detail::opt_value(b.area_ratio())
        << " slope=" << csv_number(slope_of(b)) << "\n";
  }
  out << "checkpoint=" << cp_path.string() << " runtime_s=" << detail::fixed(seconds, 3) << "\n";
  return kOk;
}

struct StatsInput {
  std::string zeroes;
  std::string checkpoint;
  std::string points;
  std::string csv;
  std::string series_csv;
  bool fit = false;
  u64 cutoff = 1000;
  std::size_t champions = 3;
  std::size_t decimation = 1;
  u64 limit = 0;  // 0: take from the file header or last crossing
  bool with_pi = true;
};

namespace detail {

inline ZeroListFile load_zeroes(const StatsInput& in) {
  if (in.zeroes.empty()) throw contract_error("--zeroes is required");
  return read_zero_list_file(in.zeroes);
}

inline u64 interval_of(const StatsInput& in, const ZeroListFile& f) {
  if (in.limit) return in.limit;
  if (f.limit) return *f.limit;
  return f.record.positions.empty() ? 0 : f.record.positions.back();
}

}  // namespace detail

inline int cmd_stats_gaps(const StatsInput& in, std::ostream& out) {
  const auto file = detail::load_zeroes(in);
  const auto& pos = file.record.positions;
  const auto hist = gap_histogram(file.record);
  out << "crossings=" << pos.size() << " total_gaps=" << hist.total_gaps << " max_gap=" << hist.max_gap << "\n";
  out << "champions=";
  const auto champs = jumping_champions(hist, in.champions);
  for (std::size_t i = 0; i < champs.size(); ++i) {
    out << (i ? "," : "") << champs[i].first << ":" << champs[i].second;
  }
  out << "\n";
  const auto pct = gap_percentage_report(hist);
  for (auto [gap, p] : pct.selected) out << "gap_" << gap << "_percent=" << csv_number(p) << " ";
  out << "selected_total_percent=" << csv_number(pct.selected_total_percent) << "\n";
  for (const auto& t : pct.thresholds) {
    out << "below_" << t.threshold << "_percent=" << csv_number(t.below_percent) << " at_most_" << t.threshold
        << "_percent=" << csv_number(t.at_most_percent) << "\n";
  }
  const auto avg = average_gap(pos, detail::interval_of(in, file));
  out << "gamma=" << csv_number(avg.gamma) << " gamma_per_crossing=" << csv_number(avg.gamma_per_crossing)
      << " xi=" << csv_number(avg.xi) << " xi_per_gap=" << csv_number(avg.xi_per_gap) << " interval=" << avg.interval
      << "\n";
  if (in.fit) {
    const auto fit = exp_decay_fit(hist, in.cutoff);
    out << "fit_amplitude=" << csv_number(fit.amplitude) << " fit_rate=" << csv_number(fit.rate)
        << " fit_r_squared=" << csv_number(fit.r_squared) << " fit_range=" << fit.min_gap << "-" << fit.max_gap
        << " fit_points=" << fit.points << "\n";
  }
  if (!in.csv.empty()) export_csv(csv_of(hist), in.csv);
  if (!in.series_csv.empty()) {
    const std::array<u64, 3> gaps{4, 8, 12};
    export_csv(csv_of(gap_share_series(pos, gaps), gaps), in.series_csv);
  }
  return kOk;
}

inline int cmd_stats_benford(const StatsInput& in, std::ostream& out) {
  const auto file = detail::load_zeroes(in);
  const auto r = benford_histogram(file.record.positions);
  out << "digit,observed,expected\n";
  for (int d = 0; d < 9; ++d) {
    out << d + 1 << "," << detail::fixed(r.observed[d], 5) << "," << detail::fixed(r.expected[d], 5) << "\n";
  }
  out << "total=" << r.total << " l1=" << csv_number(r.l1_distance) << " chi_square=" << csv_number(r.chi_square)
      << "\n";
  if (!in.csv.empty()) export_csv(csv_of(r), in.csv);
  return kOk;
}

inline int cmd_stats_digits(const StatsInput& in, std::ostream& out) {
  const auto file = detail::load_zeroes(in);
  const auto r = last_digit_histogram(file.record.positions);
  for (std::size_t i = 0; i < 5; ++i) {
    out << "digit_" << kOddDigits[i] << "=" << r.counts[i] << " percent=" << detail::fixed(r.percent[i], 4) << "\n";
  }
  out << "fit_a=" << detail::fixed(r.fit.a, 5) << " fit_a_se=" << detail::fixed(r.fit.se_a, 5)
      << " fit_b=" << detail::fixed(r.fit.b, 5) << " fit_b_se=" << detail::fixed(r.fit.se_b, 5)
      << " fit_x=digit total=" << r.total << "\n";
  if (!in.csv.empty()) export_csv(csv_of(r), in.csv);
  return kOk;
}

inline int cmd_stats_primes(const StatsInput& in, std::ostream& out) {
  const auto file = detail::load_zeroes(in);
  const auto r = primes_in_zeroes(file.record.positions);
  out << r.primes << " primes / " << r.zeroes << " zeroes; X/logX=" << detail::fixed(r.x_over_log_x, 3)
      << "; diff=" << detail::fixed(r.diff_percent, 3) << "%\n";
  out << "zeroes=" << r.zeroes << " primes=" << r.primes << " x_over_log_x=" << csv_number(r.x_over_log_x)
      << " diff_percent=" << csv_number(r.diff_percent) << "\n";
  return kOk;
}

inline int cmd_stats_growth(const StatsInput& in, std::ostream& out) {
  const auto file = detail::load_zeroes(in);
  const u64 limit = detail::interval_of(in, file);
  if (limit < 10) throw insufficient_data_error("growth report needs n >= 10");
  const auto ns = decade_points(limit);
  const auto rows = zero_growth_report(growth_checkpoints(file.record.positions, ns, in.with_pi));
  out << "n,zeroes,sqrt_n,cbrt_n,pi_n,within_band\n";
  for (const auto& r : rows) {
    out << r.n << "," << r.zeroes << "," << detail::fixed(r.sqrt_n, 3) << "," << detail::fixed(r.cbrt_n, 3) << ","
        << (r.pi_n ? std::to_string(*r.pi_n) : std::string()) << "," << (r.within_band ? 1 : 0) << "\n";
  }
  if (!in.csv.empty()) export_csv(csv_of(rows), in.csv);
  return kOk;
}

namespace detail {

struct PointSource {
  BalanceAccumulator acc;
  std::vector<Point> points;  // only for --points
  std::optional<u64> limit;   // only for --checkpoint
};

inline PointSource load_points(const StatsInput& in) {
  PointSource src;
  if (!in.checkpoint.empty()) {
    const auto cp = read_checkpoint(in.checkpoint);
    if (!cp.has_balance) throw insufficient_data_error("checkpoint was written without balance tracking");
    src.acc = cp.balance;
    src.limit = cp.state.n;
  } else if (!in.points.empty()) {
    src.points = read_points_csv(in.points);
    src.acc = balance(src.points);
  } else {
    throw contract_error("one of --checkpoint or --points is required");
  }
  return src;
}

}  // namespace detail

inline int cmd_stats_slope(const StatsInput& in, std::ostream& out) {
  const auto src = detail::load_points(in);
  double slope = 0;
  if (!src.points.empty()) {
    slope = slope_fit(src.points, in.decimation);
    if (!in.series_csv.empty()) export_csv(csv_of_slope_series(slope_series(src.points)), in.series_csv);
  } else {
    if (in.decimation != 1) throw contract_error("--decimation needs --points; checkpoints hold full sums");
    slope = slope_of(src.acc);
  }
  out << "slope=" << csv_number(slope) << " decimation=" << in.decimation << "\n";
  if (src.limit) {
    const u64 n = *src.limit;
    const u64 pi = prime_count(n);
    const auto m = slope_models(n, src.acc, pi);
    out << "n=" << n << " pi_n=" << pi << " inv_pi=" << csv_number(m.inv_pi)
        << " inv_sqrt_pi=" << csv_number(m.inv_sqrt_pi) << " diff_over_n=" << csv_number(m.diff_over_n)
        << " ratio_based=" << detail::opt_value(m.ratio_based) << " ratio_formula=\"" << kRatioModelFormula
        << "\"\n";
  }
  return kOk;
}

inline int cmd_stats_balance(const StatsInput& in, std::ostream& out) {
  const auto src = detail::load_points(in);
  const auto& b = src.acc;
  out << "points=" << b.points() << " c_pos=" << b.c_pos << " c_neg=" << b.c_neg << " c_zero=" << b.c_zero << "\n";
  out << "a_pos=" << to_string(b.a_pos_halfunits) << "/2 a_neg=" << to_string(b.a_neg_halfunits) << "/2\n";
  out << "count_ratio=" << detail::opt_value(b.count_ratio()) << " area_ratio=" << detail::opt_value(b.area_ratio())
      << "\n";
  if (!in.csv.empty()) {
    CsvTable t{{"c_pos", "c_neg", "c_zero", "a_pos", "a_neg", "count_ratio", "area_ratio"}, {}};
    t.rows.push_back({csv_number(b.c_pos), csv_number(b.c_neg), csv_number(b.c_zero), csv_number(b.a_pos()),
                      csv_number(b.a_neg()), csv_number(b.count_ratio()), csv_number(b.area_ratio())});
    export_csv(t, in.csv);
  }
  return kOk;
}

inline int cmd_fixture_triangles(int k, const std::string& out_dir, std::ostream& out) {
  if (k < 1) throw contract_error("--k must be >= 1");
  const auto ladder = triangle_ladder(k);
  const auto series = slope_series(ladder.points);
  double min_abs = std::numeric_limits<double>::infinity();
  for (auto [n, s] : series) min_abs = std::min(min_abs, std::abs(s));
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  const fs::path points_path = dir / ("triangles_k" + std::to_string(k) + ".csv");
  const fs::path series_path = dir / ("triangles_k" + std::to_string(k) + "_slope.csv");
  export_csv(csv_of(ladder.points), points_path);
  export_csv(csv_of_slope_series(series), series_path);
  out << "k=" << k << " points=" << ladder.points.size() << " slope=" << csv_number(slope_fit(ladder.points))
      << " min_abs_slope=" << csv_number(min_abs) << "\n";
  out << "points_csv=" << points_path.string() << " slope_csv=" << series_path.string() << "\n";
  return kOk;
}

inline int cmd_verify(u64 limit, u64 segment_size, std::optional<u64> corrupt, std::ostream& out,
                      std::ostream& err) {
  VerifyOptions opt;
  opt.segment_size = segment_size;
  opt.corrupt_primality_at = corrupt;
  const auto rep = verify_invariants(limit, opt);
  for (const auto& name : rep.passed) err << "ok " << name << "\n";
  if (!rep.ok) {
    out << "verify=fail invariant=" << rep.failed << " detail=\"" << rep.detail << "\"\n";
    return kInvariant;
  }
  out << "verify=ok limit=" << limit << " zeroes=" << rep.zeroes.size() << " checks=" << rep.passed.size() << "\n";
  return kOk;
}

/// Parses argv and dispatches. Never throws; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Jacob's Ladder: walk, crossings and statistics", "jladder"};
  app.require_subcommand(1);

  RunConfig cfg;
  cfg.workers = default_workers();
  auto* walk_cmd = app.add_subcommand("walk", "Walk the ladder to a limit and write crossing lists");
  walk_cmd->add_option("--limit", cfg.limit, "Walk positions 1..limit")->required()->check(CLI::Range(u64{1}, ~u64{0}));
  std::vector<Level> levels;
  walk_cmd->add_option("--level", levels, "Tracked level (repeatable, default 0)");
  walk_cmd->add_option("--segment-size", cfg.segment_size, "Integers per sieve segment")
      ->check(CLI::Range(u64{1}, ~u64{0}));
  walk_cmd->add_option("--workers", cfg.workers, std::string("Worker threads (default $") + kWorkersEnv + " or 1)")
      ->check(CLI::Range(1U, 4096U));
  walk_cmd->add_option("--out-dir", cfg.out_dir, "Directory for crossing lists and checkpoint");
  walk_cmd->add_option("--checkpoint", cfg.checkpoint_path, "Checkpoint path (default <out-dir>/checkpoint.json)");
  walk_cmd->add_option("--checkpoint-every", cfg.checkpoint_every, "Segments between checkpoints")
      ->check(CLI::Range(u64{1}, ~u64{0}));
  walk_cmd->add_flag("--resume", cfg.resume, "Continue from the checkpoint if present");
  bool no_balance = false;
  walk_cmd->add_flag("--no-balance", no_balance, "Skip point/area balance tracking");

  auto* stats_cmd = app.add_subcommand("stats", "Statistics over crossing lists or checkpoints");
  stats_cmd->require_subcommand(1);
  StatsInput sin;
  auto zeroes_opt = [&](CLI::App* c) { c->add_option("--zeroes", sin.zeroes, "Crossing list file")->required(); };
  auto csv_opt = [&](CLI::App* c) { c->add_option("--csv", sin.csv, "Write CSV here"); };
  auto* gaps = stats_cmd->add_subcommand("gaps", "Gap histogram, champions, averages, exponential fit");
  zeroes_opt(gaps);
  csv_opt(gaps);
  gaps->add_flag("--fit", sin.fit, "Fit count ~ A exp(-rate * gap)");
  gaps->add_option("--cutoff", sin.cutoff, "Largest gap used by the fit");
  gaps->add_option("--champions", sin.champions, "How many champions to list")->check(CLI::Range(1, 1000));
  gaps->add_option("--limit", sin.limit, "Interval size for xi (default: file header)");
  gaps->add_option("--series-csv", sin.series_csv, "Write gap 4/8/12 shares vs zero count");
  auto* benford = stats_cmd->add_subcommand("benford", "Leading digits vs Benford's law");
  zeroes_opt(benford);
  csv_opt(benford);
  auto* digits = stats_cmd->add_subcommand("digits", "Last digits and their linear fit");
  zeroes_opt(digits);
  csv_opt(digits);
  auto* primes = stats_cmd->add_subcommand("primes", "Primes among the crossings vs X/ln X");
  zeroes_opt(primes);
  auto* growth = stats_cmd->add_subcommand("growth", "Z(n) against sqrt(n), cbrt(n), pi(n)");
  zeroes_opt(growth);
  csv_opt(growth);
  growth->add_option("--limit", sin.limit, "Largest n (default: file header)");
  bool no_pi = false;
  growth->add_flag("--no-pi", no_pi, "Skip pi(n)");
  auto points_opts = [&](CLI::App* c) {
    auto* a = c->add_option("--checkpoint", sin.checkpoint, "Checkpoint with balance sums");
    auto* b = c->add_option("--points", sin.points, "CSV of x,y points");
    a->excludes(b);
  };
  auto* slope = stats_cmd->add_subcommand("slope", "Through-origin slope and slope models");
  points_opts(slope);
  slope->add_option("--decimation", sin.decimation, "Use every d-th point")->check(CLI::Range(1, 1 << 30));
  slope->add_option("--series-csv", sin.series_csv, "Slope vs number of points (with --points)");
  auto* bal = stats_cmd->add_subcommand("balance", "Points and areas above/below the axis");
  points_opts(bal);
  csv_opt(bal);

  auto* fixture_cmd = app.add_subcommand("fixture", "Synthetic ladders");
  fixture_cmd->require_subcommand(1);
  int k = 0;
  std::string fixture_dir = ".";
  auto* triangles = fixture_cmd->add_subcommand("triangles", "Stacked triangles, peaks growing by 3x");
  triangles->add_option("--k", k, "Number of triangles")->required()->check(CLI::Range(1, 20));
  triangles->add_option("--out-dir", fixture_dir, "Directory for the CSV files");

  auto* verify_cmd = app.add_subcommand("verify", "Check walk invariants against a trial-division oracle");
  u64 verify_limit = 0;
  u64 verify_segment = VerifyOptions{}.segment_size;
  std::optional<u64> corrupt;
  verify_cmd->add_option("--limit", verify_limit, "Check positions 1..limit (<= 10^6)")
      ->required()
      ->check(CLI::Range(u64{1}, kVerifyMaxLimit));
  verify_cmd->add_option("--segment-size", verify_segment, "Sieve segment size")->check(CLI::Range(u64{1}, ~u64{0}));
  verify_cmd->add_option("--corrupt-primality", corrupt, "Test hook: flip the oracle's primality of N")
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*walk_cmd) {
      if (!levels.empty()) cfg.levels = levels;
      cfg.balance = !no_balance;
      return cmd_walk(cfg, out, err);
    }
    if (*stats_cmd) {
      sin.with_pi = !no_pi;
      if (*gaps) return cmd_stats_gaps(sin, out);
      if (*benford) return cmd_stats_benford(sin, out);
      if (*digits) return cmd_stats_digits(sin, out);
      if (*primes) return cmd_stats_primes(sin, out);
      if (*growth) return cmd_stats_growth(sin, out);
      if (*slope) return cmd_stats_slope(sin, out);
      if (*bal) return cmd_stats_balance(sin, out);
    }
    if (*fixture_cmd && *triangles) return cmd_fixture_triangles(k, fixture_dir, out);
    if (*verify_cmd) return cmd_verify(verify_limit, verify_segment, corrupt, out, err);
  } catch (const insufficient_data_error& e) {
    err << "insufficient data: " << e.what() << "\n";
    return kUsage;
  } catch (const range_error& e) {
    err << "range error: " << e.what() << "\n";
    return kUsage;
  } catch (const contract_error& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const invariant_violation& e) {
    err << "invariant violation: " << e.what() << "\n";
    return kInvariant;
  } catch (const io_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const parse_error& e) {
    err << "parse error: " << e.what() << "\n";
    return kIo;
  } catch (const incompatible_checkpoint& e) {
    err << "incompatible checkpoint: " << e.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInvariant;
  }
  err << app.help();
  return kUsage;
}

}  // namespace jladder::cli
