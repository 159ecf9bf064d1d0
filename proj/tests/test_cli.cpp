#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rqbc/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = rqbc::cli::main(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("rqbc-cli-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "-" + ::testing::UnitTest::GetInstance()->current_test_info()->name())) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

}  // namespace

TEST(Cli, HonestPrintsAcceptance) {
  const auto r = run({"honest", "--n", "100", "--bit", "0", "--seed", "7"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("= accept(0)"), std::string::npos);
  EXPECT_NE(r.out.find("mismatchSame               = 0.000"), std::string::npos);
}

TEST(Cli, HexSeedMatchesDefault) {
  const auto a = run({"honest", "--seed", "0xB1C0FFEE"});
  const auto b = run({"honest"});
  EXPECT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("seed                       = 2982215662"), std::string::npos);
}

TEST(Cli, AttackReportsRateAndAppendsCsv) {
  TempDir dir;
  const std::string csvPath = (dir / "attack.csv").string();
  const auto r = run({"attack", "--strategy", "projective", "--theta", "45", "--n", "20", "--trials", "20000",
                      "--seed", "1", "--out", csvPath});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("wilson95 (strict)"), std::string::npos);
  const auto pos = r.out.find("rate (strict)");
  ASSERT_NE(pos, std::string::npos);
  const double rate = std::stod(r.out.substr(r.out.find('=', pos) + 1));
  EXPECT_NEAR(rate, 0.042, 0.006);
  const std::string text = slurp(csvPath);
  EXPECT_EQ(text.rfind(rqbc::csv::attackHeader() + "\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  EXPECT_EQ(run({"attack", "--n", "20", "--trials", "100", "--out", csvPath}).code, 0);
  const std::string again = slurp(csvPath);
  EXPECT_EQ(std::count(again.begin(), again.end(), '\n'), 3);
}

TEST(Cli, GeometryWithOffset) {
  const auto r = run({"geometry", "--x", "1", "--offset-q0", "0.01,0.02"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("Q'0                        = (1.01, 0, 0, 1.02)"), std::string::npos);
  EXPECT_NE(r.out.find("latestBindingTime          = 0 at (0, 0, 0)"), std::string::npos);
  const auto bad = run({"geometry", "--x", "1", "--offset-q0", "0.05,0.01"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("offset-q0"), std::string::npos);
}

TEST(Cli, ConfigErrorsExitTwo) {
  const auto noisy = run({"honest", "--e", "0.5"});
  EXPECT_EQ(noisy.code, 2);
  EXPECT_NE(noisy.err.find("e:"), std::string::npos);
  EXPECT_EQ(run({"honest", "--n", "0"}).code, 2);
  EXPECT_EQ(run({"honest", "--tau-accept", "0.4"}).code, 2);
  EXPECT_EQ(run({"honest", "--bogus"}).code, 2);
  EXPECT_EQ(run({"attack", "--strategy", "pair", "--wing0", "fixed-z", "--wing1", "fixed-x"}).code, 2);
  EXPECT_EQ(run({"sweep", "--step", "7", "--trials", "0", "--qubits", "10"}).code, 2);
  EXPECT_EQ(run({"plan", "--n", "4", "--e", "0.05", "--target", "0.999999"}).code, 1);
}

TEST(Cli, ConfigFileKeysAreStrict) {
  TempDir dir;
  const auto good = dir / "good.json";
  std::ofstream(good) << R"({"N": 200, "e": 0.01, "tauAccept": 0.1, "rhoReject": 0.3})";
  const auto r = run({"honest", "--config", good.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("N                          = 200"), std::string::npos);
  const auto bad = dir / "bad.json";
  std::ofstream(bad) << R"({"N": 200, "tauAcept": 0.1})";
  const auto b = run({"honest", "--config", bad.string()});
  EXPECT_EQ(b.code, 2);
  EXPECT_NE(b.err.find("tauAcept"), std::string::npos);
  const auto over = run({"honest", "--config", good.string(), "--n", "150"});
  EXPECT_NE(over.out.find("N                          = 150"), std::string::npos);
}

TEST(Cli, EveryConfigFieldHasADashedFlag) {
  const std::vector<std::pair<std::string, std::string>> fields{
      {"N", "300"},         {"x", "2"},           {"e", "0.01"},
      {"eta", "0.9"},       {"tauAccept", "0.1"}, {"rhoReject", "0.25"},
      {"timingTolerance", "1e-6"}, {"minSameBasisCount", "20"}};
  for (const auto& [key, value] : fields) {
    std::string flag = "--";
    for (char c : key) {
      if (std::isupper(static_cast<unsigned char>(c)) && flag.size() > 2) flag += '-';
      flag += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    const auto r = run({"honest", flag, value});
    EXPECT_EQ(r.code, 0) << flag << ": " << r.err;
  }
}

TEST(Cli, CausalityViolationInHonestRunExitsThree) {
  const auto r = run({"honest", "--offset-p", "1,0"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("causality"), std::string::npos);
}

TEST(Cli, SameRunSpecGivesIdenticalCsv) {
  TempDir dir;
  const std::vector<std::string> base{"attack", "--strategy", "fixed-z", "--n", "6", "--trials", "3000", "--seed", "99"};
  auto a = base, b = base, c = base;
  a.insert(a.end(), {"--out", (dir / "a.csv").string()});
  b.insert(b.end(), {"--out", (dir / "b.csv").string()});
  c.insert(c.end(), {"--out", (dir / "c.csv").string(), "--jobs", "3"});
  ASSERT_EQ(run(a).code, 0);
  ASSERT_EQ(run(b).code, 0);
  ASSERT_EQ(run(c).code, 0);
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "c.csv"));

  const std::vector<std::string> sweep{"sweep", "--step", "30", "--trials", "200", "--qubits", "2000",
                                       "--n-values", "5,10", "--seed", "3"};
  auto s1 = sweep, s2 = sweep;
  s1.insert(s1.end(), {"--out", (dir / "s1.csv").string()});
  s2.insert(s2.end(), {"--out", (dir / "s2.csv").string(), "--jobs", "2"});
  ASSERT_EQ(run(s1).code, 0);
  ASSERT_EQ(run(s2).code, 0);
  EXPECT_EQ(slurp(dir / "s1.csv"), slurp(dir / "s2.csv"));
  const std::string rows = slurp(dir / "s1.csv");
  EXPECT_EQ(std::count(rows.begin(), rows.end(), '\n'), 9);
}

TEST(Cli, PlanPrintsThresholds) {
  TempDir dir;
  const auto r = run({"plan", "--n", "1000", "--e", "0.05", "--target", "0.99", "--n-values", "20,40",
                      "--out", (dir / "plan.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("tauAccept"), std::string::npos);
  EXPECT_NE(r.out.find("20,0.853553,"), std::string::npos);
  EXPECT_EQ(slurp(dir / "plan.csv").rfind(rqbc::csv::planHeader(), 0), 0u);
}

TEST(Cli, TranscriptFileRoundTrips) {
  TempDir dir;
  const auto path = dir / "t.tsv";
  ASSERT_EQ(run({"honest", "--bit", "1", "--seed", "5", "--transcript", path.string()}).code, 0);
  std::ifstream in(path);
  const rqbc::Transcript tr = rqbc::readTranscript(in);
  EXPECT_EQ(rqbc::bobVerify(tr, tr.config).verdictText(), "accept(1)");
}

TEST(Cli, BinaryExitCodes) {
  const std::string bin = RQBC_CLI_PATH;
  EXPECT_EQ(WEXITSTATUS(std::system((bin + " honest --seed 7 > /dev/null").c_str())), 0);
  EXPECT_EQ(WEXITSTATUS(std::system((bin + " honest --eta 0 > /dev/null 2>&1").c_str())), 2);
  EXPECT_EQ(WEXITSTATUS(std::system((bin + " honest --offset-p 1,0 > /dev/null 2>&1").c_str())), 3);
}
