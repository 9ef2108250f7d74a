#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "battdiag/synth.hpp"
#include "commands.hpp"
#include "support.hpp"

namespace battdiag {
namespace {

namespace fs = std::filesystem;
using testing::read_file;
using testing::TempDir;

void write_small_spec(const fs::path& path) {
  FleetSpec spec;
  spec.n_vehicles = 16;
  spec.segments_per_vehicle = 5;
  spec.samples_per_segment = 90;
  spec.n_cells = 4;
  spec.n_probes = 2;
  std::ofstream(path) << fleet_spec_to_json(spec);
}

int run(const std::vector<std::string>& args) { return cli::run_cli(args); }

// Runs `cmd` and returns what it wrote to stderr.
std::string stderr_of(const std::vector<std::string>& args, int& code) {
  ::testing::internal::CaptureStderr();
  code = run(args);
  return ::testing::internal::GetCapturedStderr();
}

TEST(Cli, RunProducesEveryArtifact) {
  TempDir dir("cli_run");
  write_small_spec(dir / "spec.json");
  const fs::path out = dir / "run";
  ::testing::internal::CaptureStdout();
  const int code = run({"run", "--spec", (dir / "spec.json").string(), "--out", out.string()});
  const std::string stdout_text = ::testing::internal::GetCapturedStdout();
  ASSERT_EQ(code, cli::kOk);
  for (const char* name : {"features.csv", "split.json", "model.json", "attributions.jsonl",
                           "reports.jsonl", "summary.json", "run_manifest.json"}) {
    EXPECT_TRUE(fs::exists(out / name)) << name;
  }
  EXPECT_TRUE(fs::exists(out / "data" / "manifest.json"));

  const auto manifest = nlohmann::json::parse(read_file(out / "run_manifest.json"));
  EXPECT_EQ(manifest["command"], "run");
  EXPECT_EQ(manifest["artifacts"]["reports.jsonl"],
            cli::sha256_hex(read_file(out / "reports.jsonl")));
  const auto summary = nlohmann::json::parse(read_file(out / "summary.json"));
  EXPECT_EQ(summary, nlohmann::json::parse(stdout_text));
  EXPECT_EQ(summary["level"], "vehicle");

  // One report and one attribution line per validation segment.
  const auto split = nlohmann::json::parse(read_file(out / "split.json"));
  const std::size_t n_val = split["validation"].size() * 5;
  auto count_lines = [](const std::string& s) { return std::count(s.begin(), s.end(), '\n'); };
  EXPECT_EQ(static_cast<std::size_t>(count_lines(read_file(out / "reports.jsonl"))), n_val);
  EXPECT_EQ(static_cast<std::size_t>(count_lines(read_file(out / "attributions.jsonl"))), n_val);
}

TEST(Cli, RunIsByteDeterministic) {
  TempDir dir("cli_det");
  write_small_spec(dir / "spec.json");
  const std::string spec = (dir / "spec.json").string();
  ::testing::internal::CaptureStdout();
  ASSERT_EQ(run({"run", "--spec", spec, "--out", (dir / "a").string()}), 0);
  ASSERT_EQ(run({"run", "--spec", spec, "--out", (dir / "b").string(), "--jobs", "3"}), 0);
  ::testing::internal::GetCapturedStdout();
  for (const char* name : {"reports.jsonl", "summary.json", "model.json", "run_manifest.json"}) {
    EXPECT_EQ(read_file(dir / "a" / name), read_file(dir / "b" / name)) << name;
  }
}

TEST(Cli, SubcommandChainMatchesRun) {
  TempDir dir("cli_chain");
  write_small_spec(dir / "spec.json");
  const auto p = [&](const char* name) { return (dir / name).string(); };
  ::testing::internal::CaptureStdout();
  ASSERT_EQ(run({"simulate", "--spec", p("spec.json"), "--out", p("data")}), 0);
  EXPECT_TRUE(fs::exists(dir / "data" / "faults.json"));
  ASSERT_EQ(run({"features", "--in", p("data"), "--out", p("features.csv")}), 0);
  ASSERT_EQ(run({"split", "--truth", p("data/manifest.json"), "--out", p("split.json")}), 0);
  ASSERT_EQ(run({"train", "--features", p("features.csv"), "--split", p("split.json"), "--out",
                 p("model.json")}),
            0);
  ASSERT_EQ(run({"attribute", "--model", p("model.json"), "--features", p("features.csv"),
                 "--split", p("split.json"), "--out", p("attributions.jsonl")}),
            0);
  ASSERT_EQ(run({"diagnose", "--model", p("model.json"), "--features", p("features.csv"),
                 "--split", p("split.json"), "--out", p("reports.jsonl")}),
            0);
  ASSERT_EQ(run({"evaluate", "--reports", p("reports.jsonl"), "--truth", p("data/manifest.json"),
                 "--out", p("summary.json")}),
            0);
  ASSERT_EQ(run({"run", "--spec", p("spec.json"), "--out", p("run")}), 0);
  ::testing::internal::GetCapturedStdout();
  for (const char* name : {"features.csv", "split.json", "model.json", "attributions.jsonl",
                           "reports.jsonl", "summary.json"}) {
    EXPECT_EQ(read_file(dir / name), read_file(dir / "run" / name)) << name;
  }
}

TEST(Cli, MissingModelIsConfigError) {
  TempDir dir("cli_missing");
  std::ofstream(dir / "features.csv") << "x\n";
  int code = 0;
  const std::string err = stderr_of({"diagnose", "--model", (dir / "nope.json").string(),
                                     "--features", (dir / "features.csv").string(), "--out",
                                     (dir / "r.jsonl").string()},
                                    code);
  EXPECT_EQ(code, cli::kConfigError);
  EXPECT_NE(err.find("battdiag: [diagnose]"), std::string::npos) << err;
  EXPECT_NE(err.find("nope.json"), std::string::npos) << err;
  EXPECT_FALSE(fs::exists(dir / "r.jsonl"));
}

TEST(Cli, MalformedFeatureFileIsDataError) {
  TempDir dir("cli_bad");
  std::ofstream(dir / "features.csv") << "not,a,feature,table\n";
  int code = 0;
  const std::string err = stderr_of(
      {"train", "--features", (dir / "features.csv").string(), "--out", (dir / "m.json").string()},
      code);
  EXPECT_EQ(code, cli::kDataError);
  EXPECT_NE(err.find("battdiag: [train]"), std::string::npos) << err;
}

TEST(Cli, UsageErrors) {
  int code = 0;
  stderr_of({"diagnose"}, code);
  EXPECT_EQ(code, cli::kUsageError);
  stderr_of({"frobnicate"}, code);
  EXPECT_EQ(code, cli::kUsageError);
  stderr_of({"run", "--spec", "s.json", "--gate-margin", "abc"}, code);
  EXPECT_EQ(code, cli::kUsageError);
}

TEST(Cli, HelpExitsCleanly) {
  ::testing::internal::CaptureStdout();
  EXPECT_EQ(run({"--help"}), cli::kOk);
  const std::string text = ::testing::internal::GetCapturedStdout();
  EXPECT_NE(text.find("diagnose"), std::string::npos);
}

TEST(Cli, WriteFileAtomicAndHash) {
  TempDir dir("cli_atomic");
  cli::write_file_atomic(dir / "f.txt", "hello");
  EXPECT_EQ(read_file(dir / "f.txt"), "hello");
  EXPECT_FALSE(fs::exists(dir / "f.txt.tmp"));
  EXPECT_EQ(cli::sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Cli, BinaryEndToEnd) {
  TempDir dir("cli_bin");
  write_small_spec(dir / "spec.json");
  const std::string cmd = std::string(BATTDIAG_BINARY) + " run --spec " +
                          (dir / "spec.json").string() + " --out " + (dir / "out").string() +
                          " > " + (dir / "stdout.txt").string();
  EXPECT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "summary.json"));
  const std::string bad = std::string(BATTDIAG_BINARY) + " run 2> " + (dir / "err.txt").string();
  const int status = std::system(bad.c_str());
  EXPECT_EQ(WEXITSTATUS(status), cli::kUsageError);
}

}  // namespace
}  // namespace battdiag
