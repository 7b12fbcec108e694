#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "jladder/cli.hpp"

using namespace jladder;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "jladder");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("jladder_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string p(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, WalkRejectsLimitZero) {
  const auto r = run_cli({"walk", "--limit", "0"});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(Cli, UnknownSubcommandIsUsageError) {
  EXPECT_EQ(run_cli({"dance"}).code, cli::kUsage);
  EXPECT_EQ(run_cli({}).code, cli::kUsage);
}

TEST_F(Cli, WalkWritesOneFilePerLevel) {
  const auto r = run_cli({"walk", "--limit", "1000", "--level", "0", "--level", "1", "--out-dir", dir_.string(),
                          "--segment-size", "300"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_TRUE(fs::exists(p("crossings_L0.txt")));
  EXPECT_TRUE(fs::exists(p("crossings_L1.txt")));
  EXPECT_TRUE(fs::exists(p("checkpoint.json")));
  EXPECT_TRUE(contains(r.out, "zeroes=16 zeroes_excluding_1=15")) << r.out;
  EXPECT_EQ(read_zero_list(p("crossings_L0.txt")).positions.size(), 16U);
}

TEST_F(Cli, ResumeExtendsAnEarlierWalk) {
  ASSERT_EQ(run_cli({"walk", "--limit", "100000", "--out-dir", dir_.string(), "--segment-size", "10000"}).code,
            cli::kOk);
  const auto r = run_cli(
      {"walk", "--limit", "1000000", "--out-dir", dir_.string(), "--segment-size", "10000", "--resume"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_TRUE(contains(r.err, "resuming from n=100000")) << r.err;
  EXPECT_TRUE(contains(r.out, "zeroes=151 ")) << r.out;

  const auto clash = run_cli(
      {"walk", "--limit", "2000000", "--out-dir", dir_.string(), "--segment-size", "20000", "--resume"});
  EXPECT_EQ(clash.code, cli::kIo);
  EXPECT_TRUE(contains(clash.err, "incompatible checkpoint")) << clash.err;
}

TEST_F(Cli, StatsOnAWalk) {
  ASSERT_EQ(run_cli({"walk", "--limit", "1000000", "--out-dir", dir_.string()}).code, cli::kOk);
  const auto z = p("crossings_L0.txt");

  const auto primes = run_cli({"stats", "primes", "--zeroes", z});
  ASSERT_EQ(primes.code, cli::kOk) << primes.err;
  EXPECT_TRUE(contains(primes.out, "37 primes / 151 zeroes; X/logX=30.096")) << primes.out;

  const auto gaps = run_cli({"stats", "gaps", "--zeroes", z, "--fit", "--cutoff", "1000", "--csv", p("g.csv")});
  ASSERT_EQ(gaps.code, cli::kOk) << gaps.err;
  EXPECT_TRUE(contains(gaps.out, "crossings=151 total_gaps=150")) << gaps.out;
  EXPECT_TRUE(contains(gaps.out, "fit_rate=")) << gaps.out;
  EXPECT_TRUE(fs::exists(p("g.csv")));

  EXPECT_EQ(run_cli({"stats", "benford", "--zeroes", z}).code, cli::kOk);
  EXPECT_EQ(run_cli({"stats", "digits", "--zeroes", z}).code, cli::kOk);
  const auto growth = run_cli({"stats", "growth", "--zeroes", z});
  ASSERT_EQ(growth.code, cli::kOk) << growth.err;
  EXPECT_TRUE(contains(growth.out, "1000000,151,1000.000,100.000,78498,1")) << growth.out;

  const auto slope = run_cli({"stats", "slope", "--checkpoint", p("checkpoint.json")});
  ASSERT_EQ(slope.code, cli::kOk) << slope.err;
  EXPECT_TRUE(contains(slope.out, "pi_n=78498")) << slope.out;
  EXPECT_EQ(run_cli({"stats", "balance", "--checkpoint", p("checkpoint.json")}).code, cli::kOk);
}

TEST_F(Cli, StatsOnEmptyInputIsInsufficientData) {
  write_zero_list(CrossingRecord{0, {}}, p("empty.txt"));
  const auto r = run_cli({"stats", "benford", "--zeroes", p("empty.txt")});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_TRUE(contains(r.err, "insufficient data")) << r.err;
  EXPECT_EQ(run_cli({"stats", "gaps", "--zeroes", p("empty.txt")}).code, cli::kUsage);
}

TEST_F(Cli, StatsOnMissingOrMalformedFilesIsIoError) {
  EXPECT_EQ(run_cli({"stats", "gaps", "--zeroes", p("nope.txt")}).code, cli::kIo);
  std::ofstream(p("bad.txt")) << "7\n3\n";
  EXPECT_EQ(run_cli({"stats", "gaps", "--zeroes", p("bad.txt")}).code, cli::kIo);
}

TEST_F(Cli, FixtureTriangles) {
  const auto one = run_cli({"fixture", "triangles", "--k", "1", "--out-dir", dir_.string()});
  ASSERT_EQ(one.code, cli::kOk) << one.err;
  EXPECT_TRUE(contains(one.out, "points=3 ")) << one.out;
  EXPECT_EQ(read_points_csv(p("triangles_k1.csv")).size(), 3U);

  const auto six = run_cli({"fixture", "triangles", "--k", "6", "--out-dir", dir_.string()});
  ASSERT_EQ(six.code, cli::kOk) << six.err;
  const auto pos = six.out.find("min_abs_slope=");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_GT(std::stod(six.out.substr(pos + 14)), 0.1);

  EXPECT_EQ(run_cli({"fixture", "triangles", "--k", "0"}).code, cli::kUsage);
}

TEST_F(Cli, VerifySmallAndCorrupted) {
  const auto ok = run_cli({"verify", "--limit", "10"});
  EXPECT_EQ(ok.code, cli::kOk);
  EXPECT_TRUE(contains(ok.out, "verify=ok limit=10 zeroes=3")) << ok.out;

  EXPECT_EQ(run_cli({"verify", "--limit", "100000"}).code, cli::kOk);

  const auto bad = run_cli({"verify", "--limit", "1000", "--corrupt-primality", "97"});
  EXPECT_EQ(bad.code, cli::kInvariant);
  EXPECT_TRUE(contains(bad.out, "invariant=oracle_equivalence")) << bad.out;

  EXPECT_EQ(run_cli({"verify", "--limit", "2000000"}).code, cli::kUsage);
}
