#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "sgnn/harness.hpp"
#include "support/temp_dir.hpp"

namespace sgnn {
namespace {

using testing::TempDir;

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs the CLI through the shell with stderr sent to a file.
CliResult run_cli(const std::string& args) {
  TempDir dir;
  const std::string err_path = dir.file("stderr.txt");
  const std::string cmd = std::string(SGNN_CLI_PATH) + " " + args + " 2>" + err_path;
  CliResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = testing::read_file(err_path);
  return r;
}

std::vector<double> parse_lines(const std::string& text) {
  std::istringstream in(text);
  std::vector<double> out;
  double v;
  while (in >> v) out.push_back(v);
  return out;
}

const std::string kData = SGNN_DATA_DIR;

TEST(Cli, SpectrumOfRing) {
  TempDir dir;
  const std::string edges = dir.write("ring.txt", "# ring of four\n0 1\n1 2\n2 3\n3 0\n");
  const CliResult r = run_cli("spectrum --edges " + edges + " --kind comb");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const std::vector<double> ev = parse_lines(r.out);
  const std::vector<double> want = {0.0, 2.0, 2.0, 4.0};
  ASSERT_EQ(ev.size(), want.size());
  for (std::size_t i = 0; i < ev.size(); ++i) EXPECT_NEAR(ev[i], want[i], 1e-12);

  const CliResult to_file =
      run_cli("spectrum --edges " + edges + " --kind sym --out " + dir.file("ev.txt"));
  ASSERT_EQ(to_file.exit_code, 0);
  const std::vector<double> sym = parse_lines(testing::read_file(dir.file("ev.txt")));
  ASSERT_EQ(sym.size(), 4u);
  EXPECT_NEAR(sym.back(), 2.0, 1e-12);
}

TEST(Cli, UsageErrorsExitWithTwo) {
  for (const std::string args : {"", "spectrum", "train --runs notanumber", "frobnicate"}) {
    const CliResult r = run_cli(args);
    EXPECT_EQ(r.exit_code, 2) << args;
    const auto err = nlohmann::json::parse(r.err, nullptr, false);
    ASSERT_FALSE(err.is_discarded()) << r.err;
    EXPECT_EQ(err["error"]["code"], "usage");
  }
}

TEST(Cli, RuntimeErrorsAreJsonObjects) {
  TempDir dir;
  struct Case {
    std::string args;
    std::string code;
  };
  const std::vector<Case> cases = {
      {"spectrum --edges " + dir.file("missing.txt"), "io"},
      {"spectrum --edges " + dir.write("bad.txt", "0 x\n"), "parse"},
      {"spectrum --edges " + dir.write("ok.txt", "0 1\n") + " --kind weird", "invalid_argument"},
      {"train --model gat", "invalid_argument"},
      {"train --dataset pubmed", "invalid_argument"},
      {"train --format xml", "invalid_argument"},
      {"train", "invalid_argument"},
      {"train --content " + dir.file("none") + " --cites " + dir.file("none"), "io"},
  };
  for (const Case& c : cases) {
    const CliResult r = run_cli(c.args);
    EXPECT_EQ(r.exit_code, 1) << c.args;
    const auto err = nlohmann::json::parse(r.err, nullptr, false);
    ASSERT_FALSE(err.is_discarded()) << c.args << ": " << r.err;
    EXPECT_EQ(err["error"]["code"], c.code) << c.args;
    EXPECT_TRUE(err["error"]["message"].is_string());
  }
}

TEST(Cli, TrainWritesSummaryAndCsv) {
  TempDir dir;
  const std::string cfg = dir.write("cfg.json", R"({"epochs": 3})");
  const std::string common = "train --model gcn --content " + kData + "/cora/cora.content" +
                             " --cites " + kData + "/cora/cora.cites --config " + cfg +
                             " --runs 2 --seed 5";
  const CliResult json_run = run_cli(common + " --out " + dir.file("s.json"));
  ASSERT_EQ(json_run.exit_code, 0) << json_run.err;
  const RunSummary s = summary_from_json(testing::read_file(dir.file("s.json")));
  EXPECT_EQ(s.model, ModelKind::kGcn);
  EXPECT_EQ(s.config.epochs, 3);
  EXPECT_EQ(s.config.learning_rate, 0.01);
  ASSERT_EQ(s.per_seed.size(), 2u);
  EXPECT_EQ(s.per_seed[0].seed, 5u);
  EXPECT_EQ(s.per_seed[1].seed, 6u);
  EXPECT_EQ(s.per_seed[1].trace.size(), 3u);

  const CliResult csv_run = run_cli(common + " --format csv");
  ASSERT_EQ(csv_run.exit_code, 0) << csv_run.err;
  std::istringstream in(csv_run.out);
  std::string line;
  Index rows = -1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 6);
}

TEST(Cli, DatasetCacheIsWrittenThenRead) {
  TempDir dir;
  const std::string cache = dir.file("cora.cache");
  const std::string cfg = dir.write("cfg.json", R"({"epochs": 1})");
  const std::string files = " --content " + kData + "/cora/cora.content --cites " + kData +
                            "/cora/cora.cites";
  const CliResult first = run_cli("train --config " + cfg + " --cache " + cache + files);
  ASSERT_EQ(first.exit_code, 0) << first.err;
  // The second run has no raw files and must use the cache.
  const CliResult second = run_cli("train --config " + cfg + " --cache " + cache);
  ASSERT_EQ(second.exit_code, 0) << second.err;
  RunSummary a = summary_from_json(first.out), b = summary_from_json(second.out);
  EXPECT_EQ(a.per_seed[0].trace[0].train_loss, b.per_seed[0].trace[0].train_loss);
}

}  // namespace
}  // namespace sgnn
