#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "jladder/stats.hpp"
#include "jladder/store.hpp"
#include "jladder/walker.hpp"

using namespace jladder;

namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("jladder_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name), std::ios::binary) << text;
    return path(name);
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path dir_;
};

using ZeroList = TempDir;
using CheckpointFile = TempDir;
using Csv = TempDir;

std::vector<std::string> body_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line[0] != '#') out.push_back(line);
  }
  return out;
}

}  // namespace

TEST_F(ZeroList, WritesHeaderAndOnePositionPerLine) {
  write_zero_list(CrossingRecord{0, {1, 3, 7}}, path("z.txt"), 10);
  const auto text = slurp(path("z.txt"));
  EXPECT_EQ(body_lines(text), (std::vector<std::string>{"1", "3", "7"}));
  EXPECT_NE(text.find("# count: 3\n"), std::string::npos);
  EXPECT_NE(text.find("# level: 0\n"), std::string::npos);
  EXPECT_NE(text.find("# limit: 10\n"), std::string::npos);
}

TEST_F(ZeroList, EmptyRecordRoundTrips) {
  write_zero_list(CrossingRecord{-4, {}}, path("e.txt"));
  EXPECT_NE(slurp(path("e.txt")).find("# count: 0\n"), std::string::npos);
  EXPECT_TRUE(body_lines(slurp(path("e.txt"))).empty());
  const auto back = read_zero_list_file(path("e.txt"));
  EXPECT_EQ(back.record, (CrossingRecord{-4, {}}));
  EXPECT_FALSE(back.limit.has_value());
}

TEST_F(ZeroList, RandomRecordsRoundTrip) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    CrossingRecord rec{static_cast<Level>(rng() % 21) - 10, {}};
    u64 x = 0;
    const std::size_t n = rng() % 2000;
    for (std::size_t i = 0; i < n; ++i) rec.positions.push_back(x += 1 + rng() % 1'000'000'000ULL);
    write_zero_list(rec, path("r.txt"), x + 5);
    const auto back = read_zero_list_file(path("r.txt"));
    ASSERT_EQ(back.record, rec);
    ASSERT_EQ(back.limit, x + 5);
  }
}

TEST_F(ZeroList, WriterRejectsUnsortedRecord) {
  EXPECT_THROW(write_zero_list(CrossingRecord{0, {3, 1}}, path("bad.txt")), contract_error);
  EXPECT_FALSE(fs::exists(path("bad.txt")));
}

TEST_F(ZeroList, ReadsTwoColumnSequenceFiles) {
  write("b.txt", "1 1\n2 3\n3 7\n");
  EXPECT_EQ(read_zero_list(path("b.txt")).positions, (std::vector<u64>{1, 3, 7}));
  write("b2.txt", "# comment\n\n1 1\n2\t3\n3 7\n");
  EXPECT_EQ(read_zero_list(path("b2.txt")).positions, (std::vector<u64>{1, 3, 7}));
}

TEST_F(ZeroList, ParseErrorsNameTheLine) {
  write("desc.txt", "3\n1\n");
  try {
    read_zero_list(path("desc.txt"));
    FAIL() << "expected parse_error";
  } catch (const parse_error& e) {
    EXPECT_EQ(e.line(), 2U);
  }
  write("junk.txt", "1\n3\nseven\n");
  try {
    read_zero_list(path("junk.txt"));
    FAIL() << "expected parse_error";
  } catch (const parse_error& e) {
    EXPECT_EQ(e.line(), 3U);
  }
  write("count.txt", "# format: jladder-crossings\n# version: 1\n# level: 0\n# count: 4\n1\n3\n7\n");
  EXPECT_THROW(read_zero_list(path("count.txt")), parse_error);
  EXPECT_THROW(read_zero_list(path("missing.txt")), io_error);
}

TEST_F(CheckpointFile, RoundTripsEveryField) {
  const std::vector<Level> levels{0, 2};
  const auto r = walk(50'000, levels, WalkOptions{7'000, 1, true, 1, {}});
  const auto cp = make_checkpoint({r.state, r.records, r.balance}, 7'000, true);
  write_checkpoint(cp, path("cp.json"));
  const auto back = read_checkpoint(path("cp.json"), plan_hash(7'000, levels));
  EXPECT_EQ(back.state, r.state);
  EXPECT_EQ(back.balance, r.balance);
  EXPECT_EQ(back.level_counts, cp.level_counts);
  EXPECT_EQ(back.plan_hash, cp.plan_hash);
  EXPECT_EQ(back.written_at, cp.written_at);
  EXPECT_EQ(back.levels(), levels);
}

TEST_F(CheckpointFile, LargeAreasSurviveAsExactIntegers) {
  BalanceAccumulator acc;
  acc.add_point(1, 0);
  acc.add_run(2, 1, 1, 3'000'000'000ULL);  // areas and sums far beyond 2^64
  WalkerState st;
  st.n = 3'000'000'001ULL;
  st.y = 3'000'000'000LL;
  const std::vector<CrossingRecord> none;
  const auto cp = make_checkpoint({st, none, acc}, 10, true);
  write_checkpoint(cp, path("big.json"));
  const auto back = read_checkpoint(path("big.json"));
  EXPECT_EQ(back.balance, acc);
  EXPECT_GT(back.balance.sum_x2, static_cast<i128>(std::numeric_limits<u64>::max()));
}

TEST_F(CheckpointFile, RefusesADifferentPlan) {
  const std::vector<Level> levels{0};
  const auto r = walk(10'000, levels, WalkOptions{1'000, 1, false, 1, {}});
  write_checkpoint(make_checkpoint({r.state, r.records, r.balance}, 1'000, false), path("cp.json"));
  EXPECT_THROW(read_checkpoint(path("cp.json"), plan_hash(2'000, levels)), incompatible_checkpoint);
  EXPECT_THROW(read_checkpoint(path("cp.json"), plan_hash(1'000, std::vector<Level>{0, 1})),
               incompatible_checkpoint);
  EXPECT_NO_THROW(read_checkpoint(path("cp.json"), plan_hash(1'000, levels)));
  EXPECT_NE(plan_hash(1'000, levels), plan_hash(1'001, levels));
}

TEST_F(CheckpointFile, MalformedOrWrongVersionIsRejected) {
  write("bad.json", "{ not json");
  EXPECT_THROW(read_checkpoint(path("bad.json")), parse_error);
  const auto r = walk(100, std::vector<Level>{0});
  auto j = to_json(make_checkpoint({r.state, r.records, r.balance}, 10, true));
  j["version"] = 99;
  write("v99.json", j.dump());
  EXPECT_THROW(read_checkpoint(path("v99.json")), incompatible_checkpoint);
}

TEST_F(CheckpointFile, KillAndResumeMatchesUninterruptedWalk) {
  const std::vector<Level> levels{0, 1};
  const u64 seg = 100'000;
  const auto full = walk(2'000'000, levels, WalkOptions{seg, 1, true, 1, {}});

  auto sink = directory_checkpoint_sink(dir_, path("cp.json"), seg, true);
  int calls = 0;
  WalkOptions first{seg, 1, true, 1, [&](const WalkProgress& p) {
                      sink(p);
                      return ++calls < 4;  // "killed" after the fourth checkpoint
                    }};
  const auto partial = walk(1'000'000, levels, first);
  ASSERT_FALSE(partial.completed);

  const auto cp = read_checkpoint(path("cp.json"), plan_hash(seg, levels));
  std::vector<CrossingRecord> lists;
  for (Level l : levels) lists.push_back(read_zero_list(path(crossing_file_name(l))));
  const auto resumed = continue_walk(restore_walk(cp, lists), 2'000'000, WalkOptions{seg, 1, true, 1, {}});
  EXPECT_EQ(resumed.records, full.records);
  EXPECT_EQ(resumed.state, full.state);
  EXPECT_EQ(resumed.balance, full.balance);
}

TEST_F(CheckpointFile, RestoreTrimsListsThatRanAhead) {
  const std::vector<Level> levels{0};
  const auto early = walk(1'000, levels, WalkOptions{100, 1, false, 1, {}});
  const auto cp = make_checkpoint({early.state, early.records, early.balance}, 100, false);
  const auto later = walk(100'000, levels, WalkOptions{100, 1, false, 1, {}});
  const auto restored = restore_walk(cp, later.records);
  EXPECT_EQ(restored.records, early.records);
  EXPECT_THROW(restore_walk(cp, std::vector<CrossingRecord>{}), incompatible_checkpoint);
  auto short_list = early.records;
  short_list[0].positions.pop_back();
  EXPECT_THROW(restore_walk(cp, short_list), incompatible_checkpoint);
}

TEST_F(Csv, GapHistogramRows) {
  GapHistogram h;
  h.add(2);
  h.add(4, 10);
  EXPECT_EQ(to_csv(csv_of(h)), "gap,count\n2,1\n4,10\n");
  export_csv(csv_of(h), path("g.csv"));
  EXPECT_EQ(slurp(path("g.csv")), "gap,count\n2,1\n4,10\n");
}

TEST_F(Csv, BenfordHasNineRows) {
  const auto t = csv_of(benford_histogram(std::vector<u64>{1, 3, 7}));
  ASSERT_EQ(t.rows.size(), 9U);
  EXPECT_EQ(t.header[0], "digit");
  EXPECT_EQ(t.header[1], "observed");
  EXPECT_EQ(t.header[2], "expected");
  EXPECT_EQ(t.rows[0][0], "1");
}

TEST_F(Csv, GrowthRowAtOneMillion) {
  const std::vector<GrowthCheckpoint> cps{{1'000'000, 151, 78'498}};
  const auto rows = zero_growth_report(cps);
  const auto text = to_csv(csv_of(std::span<const GrowthRow>(rows)));
  EXPECT_NE(text.find("1000000,151,1000,"), std::string::npos) << text;
}

TEST_F(Csv, QuotingAndNumbers) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_number(0.5), "0.5");
  EXPECT_EQ(csv_number(std::optional<double>{}), "");
}

TEST_F(Csv, PointsRoundTrip) {
  const auto pts = triangle_ladder(3).points;
  export_csv(csv_of(std::span<const Point>(pts)), path("p.csv"));
  EXPECT_EQ(read_points_csv(path("p.csv")), pts);
  write("bad.csv", "x,y\n1,2\n3;4\n");
  EXPECT_THROW(read_points_csv(path("bad.csv")), parse_error);
}

TEST_F(Csv, AtomicWriteLeavesNoTempFiles) {
  export_csv(CsvTable{{"a"}, {{"1"}}}, path("t.csv"));
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir_)) ++files;
  EXPECT_EQ(files, 1U);
  EXPECT_THROW(export_csv(CsvTable{{"a"}, {}}, dir_ / "no" / "such" / "dir.csv"), io_error);
}

TEST_F(CheckpointFile, FinalListsAreByteIdenticalAfterResume) {
  const std::vector<Level> levels{0};
  const u64 limit = 300'000, seg = 10'000;
  fs::create_directories(path("a"));
  fs::create_directories(path("b"));
  walk(limit, levels,
       WalkOptions{seg, 1, false, 1, directory_checkpoint_sink(path("a"), path("a/cp.json"), seg, false, limit)});

  auto sink = directory_checkpoint_sink(path("b"), path("b/cp.json"), seg, false, limit);
  int calls = 0;
  walk(limit, levels, WalkOptions{seg, 1, false, 1, [&](const WalkProgress& p) {
                                    sink(p);
                                    return ++calls < 3;
                                  }});
  const auto cp = read_checkpoint(path("b/cp.json"));
  const auto restored = restore_walk(cp, {read_zero_list(path("b/crossings_L0.txt"))});
  continue_walk(restored, limit,
                WalkOptions{seg, 1, false, 1, directory_checkpoint_sink(path("b"), path("b/cp.json"), seg, false, limit)});
  EXPECT_EQ(slurp(path("a/crossings_L0.txt")), slurp(path("b/crossings_L0.txt")));
  EXPECT_NE(slurp(path("b/crossings_L0.txt")).find("# limit: 300000\n"), std::string::npos);
}
