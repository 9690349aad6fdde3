#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>

#include "test_support.hpp"

namespace ts = testing_support;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

/// Runs the CLI through the shell, capturing stdout (stderr discarded).
Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " '" + std::string(METASCANNER_CLI) + "' " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

const std::string kPolicy = std::string("--policy '") + METASCANNER_DEFAULT_POLICY + "'";

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new ts::TempDir;
    ASSERT_EQ(run("synth clickjacking-invisible --out '" + (dir_->path() / "attack").string() + "'").status, 0);
    ASSERT_EQ(run("synth 'benign-twin-of(clickjacking-invisible)' --out '" +
                  (dir_->path() / "twin").string() + "'")
                  .status,
              0);
  }
  static void TearDownTestSuite() { delete dir_; }
  static std::string pkg(const char* leaf) { return "'" + (dir_->path() / leaf).string() + "'"; }
  static inline ts::TempDir* dir_ = nullptr;
};

}  // namespace

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("scan " + pkg("twin") + " " + kPolicy).status, 0);
  EXPECT_EQ(run("scan " + pkg("attack") + " " + kPolicy).status, 1);
  EXPECT_EQ(run("scan " + pkg("attack") + " " + kPolicy + " --fail-on critical").status, 0);
  EXPECT_EQ(run("scan " + pkg("missing") + " " + kPolicy).status, 2);
  EXPECT_EQ(run("scan " + pkg("attack")).status, 2);  // --policy is required
  EXPECT_EQ(run("scan " + pkg("attack") + " " + kPolicy + " --format yaml").status, 2);
}

TEST_F(Cli, JsonToStdoutAndFile) {
  const auto stdout_run = run("scan " + pkg("attack") + " " + kPolicy + " --jobs 1");
  const std::string out_file = (dir_->path() / "report.json").string();
  const auto file_run = run("scan " + pkg("attack") + " " + kPolicy + " --jobs 8 --out '" + out_file + "'");
  EXPECT_EQ(file_run.status, 1);
  EXPECT_TRUE(file_run.out.empty());
  EXPECT_EQ(ts::read_text(out_file), stdout_run.out);
  EXPECT_NE(stdout_run.out.find("\"rule_id\": \"CJ-2\""), std::string::npos);
}

TEST_F(Cli, TextFormatHonorsNoColor) {
  const auto plain = run("scan " + pkg("attack") + " " + kPolicy + " --format text", "NO_COLOR=1");
  EXPECT_NE(plain.out.find("[HIGH] CJ-2 overlay"), std::string::npos) << plain.out;
  EXPECT_EQ(plain.out.find('\x1b'), std::string::npos);
}

TEST_F(Cli, PolicyCheck) {
  const auto ok = run("policy check '" + std::string(METASCANNER_DEFAULT_POLICY) + "'");
  EXPECT_EQ(ok.status, 0);
  EXPECT_NE(ok.out.find("10 of 10 rules enabled"), std::string::npos) << ok.out;
  const auto bad_path = dir_->path() / "bad-policy.json";
  ts::write_text(bad_path, R"({"rules":{"XX-9":{}}})");
  EXPECT_EQ(run("policy check '" + bad_path.string() + "'").status, 2);
}

TEST_F(Cli, SynthRejectsUnknownAttack) {
  EXPECT_EQ(run("synth rickroll --out " + pkg("nope")).status, 2);
}

TEST_F(Cli, BenchOverFixtures) {
  const auto r = run("bench '" + dir_->path().string() + "' " + kPolicy + " --format json");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("\"packages\": 2"), std::string::npos) << r.out;
}
