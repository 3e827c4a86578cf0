// Copyright 2026 The fairthresh Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fairthresh/deep_head.hpp"
#include "fairthresh/io.hpp"
#include "fairthresh/predictor.hpp"
#include "test_support.hpp"

namespace fairthresh {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code = -1;
  std::string output;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fairthresh_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    write("data.csv", data_csv(testing::synthetic_logistic(1200, 21)));
  }
  void TearDown() override { fs::remove_all(dir_); }

  static std::string data_csv(const ScoredDataset& ds) {
    std::ostringstream out;
    out.precision(17);
    out << "score,label,group" << (ds.has_strata() ? ",cond" : "") << "\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
      out << ds.scores()[i] << "," << int(ds.labels()[i]) << "," << ds.group_names()[ds.groups()[i]];
      if (ds.has_strata()) out << "," << ds.stratum_names()[ds.strata()[i]];
      out << "\n";
    }
    return out.str();
  }

  void write(const std::string& name, const std::string& content) const {
    std::ofstream(dir_ / name) << content;
  }
  std::string read(const std::string& name) const { return read_file(dir_ / name); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  CliRun run(const std::string& args) const {
    const std::string cmd = "cd '" + dir_.string() + "' && '" FAIRTHRESH_CLI "' " + args + " 2>&1";
    CliRun r;
    FILE* pipe = popen(cmd.c_str(), "r");
    char buf[4096];
    while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) r.output.append(buf, n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
  }

  fs::path dir_;
};

TEST_F(Cli, FitWritesThresholdsAndFrontier) {
  const auto r = run("fit --data data.csv --objective accuracy --constraint demographic_parity --value 0.02 --out t.json");
  ASSERT_EQ(r.code, 0) << r.output;
  const auto file = parse_thresholds(read("t.json"));
  EXPECT_EQ(file.thresholds.groups, (std::vector<std::string>{"A", "B"}));
  const auto frontier = read("frontier.csv");
  EXPECT_EQ(frontier.rfind("objective,constraint,t_A,t_B\n", 0), 0u);

  const auto ds = load_dataset(read_csv(dir_ / "data.csv"));
  const auto counts = testing::oracle_counts(ds, testing::true_rows(ds), file.thresholds.thresholds);
  EXPECT_LE(metrics::demographic_parity().evaluate(counts), 0.02);
}

TEST_F(Cli, OutputsAreDeterministic) {
  ASSERT_EQ(run("fit --data data.csv --constraint equalized_odds --value 0.03 --out a.json --frontier fa.csv").code, 0);
  ASSERT_EQ(run("fit --data data.csv --constraint equalized_odds --value 0.03 --out b.json --frontier fb.csv").code, 0);
  EXPECT_EQ(read("a.json"), read("b.json"));
  EXPECT_EQ(read("fa.csv"), read("fb.csv"));
  ASSERT_EQ(run("fit --data data.csv --group-transform random --seed 9 --coarse-T 6 --out r1.json --frontier r1.csv").code, 0);
  ASSERT_EQ(run("fit --data data.csv --group-transform random --seed 9 --coarse-T 6 --out r2.json --frontier r2.csv").code, 0);
  EXPECT_EQ(read("r1.json"), read("r2.json"));
  EXPECT_EQ(read("r1.csv"), read("r2.csv"));
}

TEST_F(Cli, UnknownMetricListsCatalog) {
  const auto r = run("fit --data data.csv --constraint frobnicate --out t.json");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("unknown metric 'frobnicate'"), std::string::npos);
  EXPECT_NE(r.output.find("Valid names:"), std::string::npos);
  EXPECT_NE(r.output.find("equalized_odds"), std::string::npos);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("fit --data data.csv").code, 2);
  EXPECT_EQ(run("fit --data data.csv --out t.json --levelling-up sideways").code, 2);
  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(Cli, DataErrors) {
  EXPECT_EQ(run("fit --data missing.csv --out t.json").code, 3);
  write("bad.csv", "score,label,group\n0.5,2,A\n");
  const auto r = run("fit --data bad.csv --out t.json");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.output.find("non-binary label"), std::string::npos);
}

TEST_F(Cli, BudgetError) {
  const auto r = run("fit --data data.csv --coarse-T 50 --max-combinations 100 --out t.json");
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.output.find("budget"), std::string::npos);
}

TEST_F(Cli, EvaluateFairnessAndPredict) {
  ASSERT_EQ(run("fit --data data.csv --constraint demographic_parity --value 0.02 --out t.json").code, 0);
  ASSERT_EQ(run("evaluate --data data.csv --thresholds t.json --out eval.csv").code, 0);
  EXPECT_EQ(read("eval.csv").rfind("metric,scope,original,updated\naccuracy,overall,", 0), 0u);
  ASSERT_EQ(run("evaluate --data data.csv --thresholds t.json --per-group --metrics recall precision --out pg.csv").code, 0);
  EXPECT_NE(read("pg.csv").find("recall,B,"), std::string::npos);
  ASSERT_EQ(run("fairness --data data.csv --thresholds t.json --out fair.json").code, 0);
  EXPECT_NE(read("fair.json").find("cond:pos_pred_rate.diff"), std::string::npos);

  ASSERT_EQ(run("predict --data data.csv --thresholds t.json --out pred.csv").code, 0);
  const auto ds = load_dataset(read_csv(dir_ / "data.csv"));
  FairPredictor p(ds);
  p.set_thresholds(parse_thresholds(read("t.json")).thresholds);
  const auto expected = p.predict(ds);
  std::istringstream lines(read("pred.csv"));
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "row,shifted,decision");
  std::size_t i = 0;
  while (std::getline(lines, line)) {
    ASSERT_LT(i, expected.size());
    EXPECT_EQ(line.back() - '0', expected[i]) << line;
    ++i;
  }
  EXPECT_EQ(i, ds.size());
}

TEST_F(Cli, FullPrecisionReport) {
  ASSERT_EQ(run("fit --data data.csv --constraint demographic_parity --value 0.02 --out t.json").code, 0);
  ASSERT_EQ(run("evaluate --data data.csv --thresholds t.json --precision full --out full.csv").code, 0);
  ASSERT_EQ(run("evaluate --data data.csv --thresholds t.json --out short.csv").code, 0);
  const auto ds = load_dataset(read_csv(dir_ / "data.csv"));
  FairPredictor p(ds);
  p.set_thresholds(parse_thresholds(read("t.json")).thresholds);
  const auto report = p.evaluate(ds);
  EXPECT_EQ(read("full.csv"), report_to_csv(report, true));
  EXPECT_EQ(read("short.csv"), report_to_csv(report, false));
  std::istringstream lines(read("full.csv"));
  std::string line;
  std::getline(lines, line);
  for (const auto& row : report.rows) {
    std::getline(lines, line);
    const auto comma = line.rfind(',');
    EXPECT_EQ(std::stod(line.substr(comma + 1)), row.updated) << line;
  }
}

TEST_F(Cli, FrontierOnly) {
  const auto r = run("frontier --data data.csv --constraint equal_opportunity --coarse-T 10");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.output.find("objective,constraint,t_A,t_B"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "frontier.csv"));
}

TEST_F(Cli, MergeHead) {
  write("h.json", R"({"w_f":[1,0],"b_f":0.5,"w_g":[[0,1],[1,0]],"b_g":[0.1,-0.1],"embeddings":[[1,2],[-3,0.5]]})");
  write("t.json", R"({"groups":["A","B"],"t":[0.2,0.3]})");
  const auto r = run("merge-head --heads h.json --thresholds t.json --out c.json");
  ASSERT_EQ(r.code, 0) << r.output;
  const auto record = parse_coefficients(read("c.json"));
  EXPECT_NEAR(record.head.w[0], 0.7, 1e-15);
  EXPECT_NEAR(record.head.w[1], -0.2, 1e-15);
  EXPECT_NEAR(record.head.b, 0.51, 1e-15);
  EXPECT_EQ(record.groups, (std::vector<std::string>{"A", "B"}));

  write("bad.json", R"({"w_f":[1,0],"b_f":0.5,"w_g":[[0,1],[1,0]]})");
  const auto bad = run("merge-head --heads bad.json --thresholds t.json");
  EXPECT_EQ(bad.code, 3);
  EXPECT_NE(bad.output.find("incomplete heads"), std::string::npos);
}

TEST_F(Cli, InferredGroups) {
  std::mt19937_64 rng(5);
  const auto ds = testing::random_dataset(rng, {.n = 300, .k = 2, .soft = true});
  std::ostringstream out;
  out.precision(17);
  out << "score,label,group,g:g0,g:g1\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out << ds.scores()[i] << "," << int(ds.labels()[i]) << "," << ds.group_names()[ds.groups()[i]] << ","
        << ds.soft_groups(i)[0] << "," << ds.soft_groups(i)[1] << "\n";
  }
  write("soft.csv", out.str());
  for (const char* mode : {"fast", "slow", "hybrid"}) {
    const auto r = run(std::string("fit --data soft.csv --constraint demographic_parity --value 0.05 --baseline-threshold 0.5 "
                                   "--coarse-T 6 --fine-T 6 --infer-groups ") + mode + " --out t.json");
    ASSERT_EQ(r.code, 0) << mode << ": " << r.output;
    ASSERT_EQ(run("predict --data soft.csv --thresholds t.json --out p.csv").code, 0) << mode;
  }
  EXPECT_EQ(run("fit --data data.csv --infer-groups fast --out t.json").code, 3);
}

}  // namespace
}  // namespace fairthresh
