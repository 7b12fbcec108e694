#pragma once

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "jladder/balance.hpp"
#include "jladder/errors.hpp"
#include "jladder/int128.hpp"
#include "jladder/stats.hpp"
#include "jladder/walker.hpp"

namespace jladder {

namespace fs = std::filesystem;

inline constexpr int kZeroListVersion = 1;
inline constexpr int kCheckpointVersion = 1;

// Writes via a sibling temp file and rename(2), so `path` is either the old
// content or the complete new content.
inline void write_atomically(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open " + tmp.string() + " for writing");
    body(out);
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw io_error("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw io_error("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

// ---------------------------------------------------------------------------
// Zero lists

struct ZeroListFile {
  int version = kZeroListVersion;
  CrossingRecord record;
  std::optional<u64> limit;  // walked limit, when the header states it
};

inline void write_zero_list(const CrossingRecord& record, const fs::path& path,
                            std::optional<u64> limit = std::nullopt) {
  for (std::size_t i = 1; i < record.positions.size(); ++i) {
    if (record.positions[i] <= record.positions[i - 1]) {
      throw contract_error("zero list positions must be strictly increasing");
    }
  }
  write_atomically(path, [&](std::ostream& out) {
    out << "# format: jladder-crossings\n";
    out << "# version: " << kZeroListVersion << "\n";
    out << "# level: " << record.level << "\n";
    if (limit) out << "# limit: " << *limit << "\n";
    out << "# count: " << record.positions.size() << "\n";
    std::string buf;
    for (u64 p : record.positions) {
      buf += std::to_string(p);
      buf += '\n';
      if (buf.size() > (1U << 16)) {
        out << buf;
        buf.clear();
      }
    }
    out << buf;
  });
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <class Int>
bool parse_int(std::string_view s, Int& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace detail

/// Reads a native crossing list ("# key: value" header, one position per line)
/// or a b-file ("index value" per line). Validates ordering and header count.
inline ZeroListFile read_zero_list_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  const std::string where = path.string();
  ZeroListFile file;
  std::optional<u64> declared_count;
  std::string line;
  std::size_t line_no = 0;
  int columns = 0;  // 1 native, 2 b-file; fixed by the first data line
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      const auto colon = text.find(':');
      if (colon == std::string_view::npos) continue;  // free-form comment
      const auto key = detail::trim(text.substr(1, colon - 1));
      const auto value = detail::trim(text.substr(colon + 1));
      if (key == "version") {
        if (!detail::parse_int(value, file.version)) throw parse_error(where, line_no, "bad version");
        if (file.version != kZeroListVersion) {
          throw parse_error(where, line_no, "unsupported version " + std::string(value));
        }
      } else if (key == "level") {
        if (!detail::parse_int(value, file.record.level)) throw parse_error(where, line_no, "bad level");
      } else if (key == "limit") {
        u64 v = 0;
        if (!detail::parse_int(value, v)) throw parse_error(where, line_no, "bad limit");
        file.limit = v;
      } else if (key == "count") {
        u64 v = 0;
        if (!detail::parse_int(value, v)) throw parse_error(where, line_no, "bad count");
        declared_count = v;
      }
      continue;
    }
    const auto fields = detail::split_ws(text);
    if (columns == 0) {
      if (fields.size() != 1 && fields.size() != 2) {
        throw parse_error(where, line_no, "expected 1 or 2 columns, got " + std::to_string(fields.size()));
      }
      columns = static_cast<int>(fields.size());
    }
    if (static_cast<int>(fields.size()) != columns) {
      throw parse_error(where, line_no, "expected " + std::to_string(columns) + " columns");
    }
    u64 value = 0;
    if (!detail::parse_int(fields.back(), value)) {
      throw parse_error(where, line_no, "not a non-negative integer: '" + std::string(fields.back()) + "'");
    }
    if (columns == 2) {
      u64 index = 0;
      if (!detail::parse_int(fields.front(), index)) throw parse_error(where, line_no, "bad index");
    }
    if (!file.record.positions.empty() && value <= file.record.positions.back()) {
      throw parse_error(where, line_no,
                        "positions not increasing: " + std::to_string(value) + " after " +
                            std::to_string(file.record.positions.back()));
    }
    file.record.positions.push_back(value);
  }
  if (in.bad()) throw io_error("read failed for " + where);
  if (declared_count && *declared_count != file.record.positions.size()) {
    throw parse_error(where, line_no,
                      "header count " + std::to_string(*declared_count) + " but " +
                          std::to_string(file.record.positions.size()) + " positions");
  }
  return file;
}

inline CrossingRecord read_zero_list(const fs::path& path) { return read_zero_list_file(path).record; }

// ---------------------------------------------------------------------------
// Checkpoints

/// FNV-1a over the parameters a resumed walk must share with the original.
/// The limit is excluded so a checkpoint can be extended to a larger limit.
inline std::string plan_hash(u64 segment_size, std::span<const Level> levels) {
  std::string key = "segment_size=" + std::to_string(segment_size) + ";levels=";
  for (Level l : levels) key += std::to_string(l) + ",";
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : key) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

struct Checkpoint {
  int version = kCheckpointVersion;
  WalkerState state;
  std::vector<std::pair<Level, u64>> level_counts;  // in tracking order
  BalanceAccumulator balance;
  bool has_balance = true;
  std::string plan_hash;
  std::string written_at;

  std::vector<Level> levels() const {
    std::vector<Level> out;
    for (auto [l, c] : level_counts) out.push_back(l);
    return out;
  }
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline Checkpoint make_checkpoint(const WalkProgress& progress, u64 segment_size, bool has_balance) {
  Checkpoint cp;
  cp.state = progress.state;
  for (const auto& r : progress.records) cp.level_counts.emplace_back(r.level, r.positions.size());
  cp.balance = progress.balance;
  cp.has_balance = has_balance;
  std::vector<Level> levels;
  for (const auto& r : progress.records) levels.push_back(r.level);
  cp.plan_hash = plan_hash(segment_size, levels);
  cp.written_at = utc_timestamp();
  return cp;
}

namespace detail {

inline nlohmann::json point_json(const std::optional<Point>& p) {
  if (!p) return nullptr;
  return nlohmann::json::array({p->x, p->y});
}

inline std::optional<Point> point_from(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return Point{j.at(0).get<i64>(), j.at(1).get<i64>()};
}

}  // namespace detail

inline nlohmann::json to_json(const Checkpoint& cp) {
  nlohmann::json levels = nlohmann::json::array();
  for (auto [l, c] : cp.level_counts) levels.push_back({{"level", l}, {"count", c}});
  nlohmann::json j;
  j["version"] = cp.version;
  j["n"] = cp.state.n;
  j["y"] = cp.state.y;
  j["parity"] = cp.state.parity;
  j["levels"] = levels;
  if (cp.has_balance) {
    const auto& b = cp.balance;
    j["balance"] = {{"c_pos", b.c_pos},
                    {"c_neg", b.c_neg},
                    {"c_zero", b.c_zero},
                    {"a_pos_halfunits", to_string(b.a_pos_halfunits)},
                    {"a_neg_halfunits", to_string(b.a_neg_halfunits)},
                    {"sum_x", to_string(b.sum_x)},
                    {"sum_x2", to_string(b.sum_x2)},
                    {"sum_xy", to_string(b.sum_xy)},
                    {"first", detail::point_json(b.first)},
                    {"last", detail::point_json(b.last)}};
  } else {
    j["balance"] = nullptr;
  }
  j["plan_hash"] = cp.plan_hash;
  j["written_at"] = cp.written_at;
  return j;
}

inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  Checkpoint cp;
  cp.version = j.at("version").get<int>();
  if (cp.version != kCheckpointVersion) {
    throw incompatible_checkpoint("checkpoint version " + std::to_string(cp.version) +
                                  ", expected " + std::to_string(kCheckpointVersion));
  }
  cp.state.n = j.at("n").get<u64>();
  cp.state.y = j.at("y").get<i64>();
  cp.state.parity = j.at("parity").get<unsigned>();
  if (cp.state.parity > 1) throw incompatible_checkpoint("checkpoint parity must be 0 or 1");
  for (const auto& lv : j.at("levels")) {
    const auto level = lv.at("level").get<Level>();
    const auto count = lv.at("count").get<u64>();
    cp.level_counts.emplace_back(level, count);
    cp.state.crossing_counts[level] = count;
  }
  const auto& b = j.at("balance");
  cp.has_balance = !b.is_null();
  if (cp.has_balance) {
    cp.balance.c_pos = b.at("c_pos").get<u64>();
    cp.balance.c_neg = b.at("c_neg").get<u64>();
    cp.balance.c_zero = b.at("c_zero").get<u64>();
    cp.balance.a_pos_halfunits = parse_i128(b.at("a_pos_halfunits").get<std::string>());
    cp.balance.a_neg_halfunits = parse_i128(b.at("a_neg_halfunits").get<std::string>());
    cp.balance.sum_x = parse_i128(b.at("sum_x").get<std::string>());
    cp.balance.sum_x2 = parse_i128(b.at("sum_x2").get<std::string>());
    cp.balance.sum_xy = parse_i128(b.at("sum_xy").get<std::string>());
    cp.balance.first = detail::point_from(b.value("first", nlohmann::json()));
    cp.balance.last = detail::point_from(b.value("last", nlohmann::json()));
  }
  cp.plan_hash = j.at("plan_hash").get<std::string>();
  cp.written_at = j.value("written_at", "");
  return cp;
}

inline void write_checkpoint(const Checkpoint& cp, const fs::path& path) {
  const std::string text = to_json(cp).dump(2) + "\n";
  write_atomically(path, [&](std::ostream& out) { out << text; });
}

/// Reads a checkpoint; when `expected_plan_hash` is given, a different plan
/// (segment size or level list) is refused.
inline Checkpoint read_checkpoint(const fs::path& path,
                                  std::optional<std::string> expected_plan_hash = std::nullopt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  Checkpoint cp;
  try {
    cp = checkpoint_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(path.string(), 0, std::string("malformed checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw parse_error(path.string(), 0, std::string("malformed checkpoint: ") + e.what());
  }
  if (expected_plan_hash && *expected_plan_hash != cp.plan_hash) {
    throw incompatible_checkpoint("checkpoint " + path.string() + " has plan hash " + cp.plan_hash +
                                  ", this run expects " + *expected_plan_hash);
  }
  return cp;
}

/// Rebuilds the in-memory walk from a checkpoint and the crossing lists that
/// were on disk with it. Lists may run ahead of the checkpoint (written after
/// it); they are cut back to the checkpoint position.
inline WalkResult restore_walk(const Checkpoint& cp, std::vector<CrossingRecord> records) {
  WalkResult r;
  r.state = cp.state;
  if (cp.has_balance) r.balance = cp.balance;
  for (auto [level, count] : cp.level_counts) {
    auto it = std::find_if(records.begin(), records.end(), [&](const auto& rec) { return rec.level == level; });
    if (it == records.end()) {
      throw incompatible_checkpoint("no crossing list for level " + std::to_string(level));
    }
    auto& pos = it->positions;
    pos.erase(std::upper_bound(pos.begin(), pos.end(), cp.state.n), pos.end());
    if (pos.size() != count) {
      throw incompatible_checkpoint("level " + std::to_string(level) + ": checkpoint has " +
                                    std::to_string(count) + " crossings, list has " +
                                    std::to_string(pos.size()));
    }
    r.records.push_back(*it);
  }
  return r;
}

inline std::string crossing_file_name(Level level) { return "crossings_L" + std::to_string(level) + ".txt"; }

/// Checkpoint sink that writes crossing lists (only when they changed) and
/// then the checkpoint into `dir`. Once the walk reaches `final_limit` every
/// list is rewritten, so its header names the final limit however the walk
/// was split into resumed runs.
inline CheckpointSink directory_checkpoint_sink(fs::path dir, fs::path checkpoint_path, u64 segment_size,
                                                bool has_balance, std::optional<u64> final_limit = std::nullopt) {
  auto written = std::make_shared<std::map<Level, std::size_t>>();
  return [=](const WalkProgress& p) {
    const bool done = final_limit && p.state.n >= *final_limit;
    for (const auto& rec : p.records) {
      auto it = written->find(rec.level);
      if (!done && it != written->end() && it->second == rec.positions.size()) continue;
      write_zero_list(rec, dir / crossing_file_name(rec.level), p.state.n);
      (*written)[rec.level] = rec.positions.size();
    }
    write_checkpoint(make_checkpoint(p, segment_size, has_balance), checkpoint_path);
    return true;
  };
}

// ---------------------------------------------------------------------------
// CSV

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Shortest round-trip decimal, '.' separator, independent of locale.
inline std::string csv_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}
inline std::string csv_number(u64 v) { return std::to_string(v); }
inline std::string csv_number(i64 v) { return std::to_string(v); }
inline std::string csv_number(std::optional<double> v) { return v ? csv_number(*v) : std::string(); }

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string to_csv(const CsvTable& t) {
  std::string out;
  auto row = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += csv_field(fields[i]);
    }
    out += '\n';
  };
  row(t.header);
  for (const auto& r : t.rows) row(r);
  return out;
}

inline void export_csv(const CsvTable& table, const fs::path& path) {
  const std::string text = to_csv(table);
  write_atomically(path, [&](std::ostream& out) { out << text; });
}

inline CsvTable csv_of(const GapHistogram& h) {
  CsvTable t{{"gap", "count"}, {}};
  for (auto [gap, count] : h.counts) t.rows.push_back({csv_number(gap), csv_number(count)});
  return t;
}

inline CsvTable csv_of(const LeadingDigitReport& r) {
  CsvTable t{{"digit", "observed", "expected", "count"}, {}};
  for (int d = 0; d < 9; ++d) {
    t.rows.push_back({std::to_string(d + 1), csv_number(r.observed[d]), csv_number(r.expected[d]),
                      csv_number(r.counts[d])});
  }
  return t;
}

inline CsvTable csv_of(const LastDigitReport& r) {
  CsvTable t{{"digit", "count", "percent"}, {}};
  for (std::size_t i = 0; i < 5; ++i) {
    t.rows.push_back({std::to_string(kOddDigits[i]), csv_number(r.counts[i]), csv_number(r.percent[i])});
  }
  return t;
}

inline CsvTable csv_of(std::span<const GrowthRow> rows) {
  CsvTable t{{"n", "zeroes", "sqrt_n", "cbrt_n", "pi_n", "within_band"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({csv_number(r.n), csv_number(r.zeroes), csv_number(r.sqrt_n), csv_number(r.cbrt_n),
                      r.pi_n ? csv_number(*r.pi_n) : std::string(), r.within_band ? "1" : "0"});
  }
  return t;
}

inline CsvTable csv_of(const GapPercentageReport& r) {
  CsvTable t{{"kind", "gap", "percent"}, {}};
  for (auto [gap, pct] : r.selected) t.rows.push_back({"equal", csv_number(gap), csv_number(pct)});
  for (const auto& s : r.thresholds) {
    t.rows.push_back({"below", csv_number(s.threshold), csv_number(s.below_percent)});
    t.rows.push_back({"at_most", csv_number(s.threshold), csv_number(s.at_most_percent)});
  }
  return t;
}

inline CsvTable csv_of(std::span<const GapShareRow> rows, std::span<const u64> gaps) {
  CsvTable t{{"zeroes"}, {}};
  for (u64 g : gaps) t.header.push_back("gap_" + std::to_string(g) + "_percent");
  for (const auto& r : rows) {
    std::vector<std::string> fields{csv_number(r.zeroes)};
    for (double p : r.percent) fields.push_back(csv_number(p));
    t.rows.push_back(std::move(fields));
  }
  return t;
}

inline CsvTable csv_of(std::span<const Point> points) {
  CsvTable t{{"x", "y"}, {}};
  for (const auto& p : points) t.rows.push_back({csv_number(p.x), csv_number(p.y)});
  return t;
}

inline CsvTable csv_of_slope_series(std::span<const std::pair<std::size_t, double>> series) {
  CsvTable t{{"points", "slope"}, {}};
  for (auto [n, s] : series) t.rows.push_back({csv_number(static_cast<u64>(n)), csv_number(s)});
  return t;
}

/// Reads an "x,y" CSV with a header row (the format csv_of(points) writes).
inline std::vector<Point> read_points_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  std::vector<Point> points;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (line_no == 1 || text.empty()) continue;
    const auto comma = text.find(',');
    Point p;
    if (comma == std::string_view::npos || !detail::parse_int(text.substr(0, comma), p.x) ||
        !detail::parse_int(text.substr(comma + 1), p.y)) {
      throw parse_error(path.string(), line_no, "expected 'x,y' integers");
    }
    points.push_back(p);
  }
  return points;
}

}  // namespace jladder
