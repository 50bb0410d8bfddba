//
// Copyright 2026 The dpls Authors
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
//

#include "dpls/harness.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "absl/strings/str_split.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dpls {
namespace {

using ::testing::HasSubstr;
using ::testing::StartsWith;

ExperimentConfig SmallConfig(SolverKind solver) {
  ExperimentConfig config;
  config.solver = solver;
  config.n = 5;
  config.m = 2;
  config.trials = 4;
  config.seed = 17;
  config.validate = false;
  config.key_bits = 512;
  config.backend = DiShufBackend::kPlaintext;
  return config;
}

TEST(ConfigTest, ParsesTextWithComments) {
  ExperimentConfig config;
  const absl::Status status = ApplyConfigText(config, R"(
# case study, small
solver = dishuf-ac
n=7   # agents
eps = 2.5
gamma_bar = none
backend = plaintext
seed = 99
noise_off = true
)");
  ASSERT_TRUE(status.ok()) << status;
  EXPECT_EQ(config.solver, SolverKind::kDiShufAc);
  EXPECT_EQ(config.n, 7);
  EXPECT_EQ(config.epsilon, 2.5);
  EXPECT_FALSE(config.gamma_bar.has_value());
  EXPECT_EQ(config.backend, DiShufBackend::kPlaintext);
  EXPECT_EQ(config.seed, 99u);
  EXPECT_TRUE(config.noise_off);
}

TEST(ConfigTest, ErrorsNameTheLineAndKey) {
  ExperimentConfig config;
  auto unknown = ApplyConfigText(config, "n = 3\nlearning_rate = 1\n");
  EXPECT_THAT(unknown.message(), HasSubstr("line 2"));
  EXPECT_THAT(unknown.message(), HasSubstr("learning_rate"));
  EXPECT_FALSE(ApplyConfigText(config, "n\n").ok());
  EXPECT_FALSE(SetConfigValue(config, "n", "three").ok());
  EXPECT_FALSE(SetConfigValue(config, "solver", "admm").ok());
  EXPECT_FALSE(SetConfigValue(config, "backend", "rsa").ok());
}

TEST(ConfigTest, SeedIsRequired) {
  ExperimentConfig config;
  EXPECT_THAT(ValidateConfig(config).message(), HasSubstr("seed"));
  config.seed = 1;
  EXPECT_TRUE(ValidateConfig(config).ok());
  config.trials = 0;
  EXPECT_FALSE(ValidateConfig(config).ok());
}

TEST(SolverNameTest, RoundTrips) {
  for (SolverKind kind :
       {SolverKind::kGt, SolverKind::kDiShufAc, SolverKind::kAcBaseline}) {
    EXPECT_EQ(*ParseSolverKind(SolverName(kind)), kind);
  }
}

TEST(QuantileTest, InclusiveInterpolation) {
  const std::vector<double> v = {4, 1, 3, 2};
  EXPECT_DOUBLE_EQ(Quantile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(Quantile(v, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(Quantile(v, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(Quantile(v, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(Quantile(v, 0.75), 3.25);
  EXPECT_DOUBLE_EQ(Quantile({5}, 0.3), 5.0);
  EXPECT_TRUE(std::isnan(Quantile({}, 0.5)));

  const Summary s = Summarize({1, 2, 3, 4, 5}, 2);
  EXPECT_EQ(s.count, 5);
  EXPECT_EQ(s.failed, 2);
  EXPECT_DOUBLE_EQ(s.mean, 3.0);
  EXPECT_DOUBLE_EQ(s.q1, 2.0);
  EXPECT_DOUBLE_EQ(s.median, 3.0);
  EXPECT_DOUBLE_EQ(s.q3, 4.0);
}

TEST(OutputTest, TrialsCsvLayout) {
  TrialRow ok;
  ok.trial = 0;
  ok.solver = SolverKind::kDiShufAc;
  ok.n = 10;
  ok.m = 3;
  ok.epsilon = 10;
  ok.delta = 0.2;
  ok.mu = 3;
  ok.error_sq = 0.1;
  ok.mean_agent_error_sq = 0.25;
  ok.iterations = 42;
  TrialRow bad = ok;
  bad.trial = 1;
  bad.failed = true;
  bad.error_sq = bad.mean_agent_error_sq = std::nan("");

  std::ostringstream out;
  WriteTrialsHeader(out);
  WriteTrialRows(out, {ok, bad});
  const std::vector<std::string> lines =
      absl::StrSplit(out.str(), '\n', absl::SkipEmpty());
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "# dpls schema v1");
  EXPECT_EQ(lines[1],
            "trial,solver,n,m,eps,delta,mu,error_sq,mean_agent_error_sq,"
            "iters,failed");
  EXPECT_EQ(lines[2], "0,dishuf-ac,10,3,10,0.20000000000000001,3,"
                      "0.10000000000000001,0.25,42,0");
  EXPECT_EQ(lines[3], "1,dishuf-ac,10,3,10,0.20000000000000001,3,nan,nan,42,1");
}

TEST(OutputTest, TrajectoryCsvLayout) {
  std::ostringstream out;
  WriteTrajectory(out, {{0, 4.0, 1.0}, {1, 0.5, 0.25}});
  EXPECT_EQ(out.str(), "# dpls schema v1\nround,mean_sq_error\n0,4\n1,0.5\n");
}

TEST(ExperimentTest, CaseStudyGtIsInfeasibleUnlessValidationIsOff) {
  ExperimentConfig config = SmallConfig(SolverKind::kGt);
  config.n = 10;
  config.m = 3;
  config.validate = true;
  auto strict = Experiment::Create(config);
  EXPECT_TRUE(absl::IsFailedPrecondition(strict.status()));
  EXPECT_THAT(strict.status().message(), HasSubstr("infeasible"));
  config.validate = false;
  auto loose = Experiment::Create(config);
  ASSERT_TRUE(loose.ok()) << loose.status();
  EXPECT_FALSE(loose->gt_calibration()->feasible);
  EXPECT_NEAR(loose->problem().lambda_min(), 60.0, 1e-9);
  EXPECT_NEAR(loose->problem().b_sum().norm(), 60.0, 1e-9);
}

TEST(ExperimentTest, SameSeedSameInstance) {
  ExperimentConfig config = SmallConfig(SolverKind::kAcBaseline);
  const Experiment a = *Experiment::Create(config);
  const Experiment b = *Experiment::Create(config);
  EXPECT_EQ(a.problem().a_sum(), b.problem().a_sum());
  config.seed = 18;
  const Experiment c = *Experiment::Create(config);
  EXPECT_NE(a.problem().a_sum(), c.problem().a_sum());
}

class NoiseOffTest : public ::testing::TestWithParam<SolverKind> {};

TEST_P(NoiseOffTest, RecoversOptimum) {
  ExperimentConfig config = SmallConfig(GetParam());
  config.noise_off = true;
  config.gt_rounds = 20000;
  auto result = MonteCarlo(config);
  ASSERT_TRUE(result.ok()) << result.status();
  for (const TrialRow& row : result->rows) {
    EXPECT_FALSE(row.failed) << row.failure;
    EXPECT_LE(row.error_sq, 1e-8);
    EXPECT_LE(row.mean_agent_error_sq, 1e-8);
  }
}

TEST_P(NoiseOffTest, JobsDoNotChangeRows) {
  ExperimentConfig config = SmallConfig(GetParam());
  config.gt_rounds = 200;
  config.jobs = 1;
  auto serial = *MonteCarlo(config);
  config.jobs = 3;
  auto parallel = *MonteCarlo(config);
  ASSERT_EQ(serial.rows.size(), parallel.rows.size());
  for (size_t t = 0; t < serial.rows.size(); ++t) {
    EXPECT_EQ(serial.rows[t].error_sq, parallel.rows[t].error_sq);
    EXPECT_EQ(serial.rows[t].iterations, parallel.rows[t].iterations);
  }
  std::ostringstream a, b;
  WriteTrialRows(a, serial.rows);
  WriteTrialRows(b, parallel.rows);
  EXPECT_EQ(a.str(), b.str());
}

INSTANTIATE_TEST_SUITE_P(AllSolvers, NoiseOffTest,
                         ::testing::Values(SolverKind::kGt,
                                           SolverKind::kDiShufAc,
                                           SolverKind::kAcBaseline),
                         [](const auto& info) {
                           std::string name = SolverName(info.param);
                           name.erase(std::remove(name.begin(), name.end(), '-'),
                                      name.end());
                           return name;
                         });

TEST(MonteCarloTest, ForcedSingularGivesFailedRows) {
  ExperimentConfig config = SmallConfig(SolverKind::kAcBaseline);
  config.debug_force_singular = true;
  auto result = MonteCarlo(config);
  ASSERT_TRUE(result.ok()) << result.status();
  for (const TrialRow& row : result->rows) {
    EXPECT_TRUE(row.failed);
    EXPECT_THAT(row.failure, HasSubstr("singular"));
    EXPECT_TRUE(std::isnan(row.error_sq));
  }
  EXPECT_EQ(result->error.failed, 4);
  EXPECT_EQ(result->error.count, 0);
}

TEST(MeanTrajectoryTest, StartsAtXStarNormAndDecreases) {
  ExperimentConfig config = SmallConfig(SolverKind::kGt);
  config.gt_rounds = 100;
  config.trials = 2;
  auto trajectory = MeanTrajectory(config);
  ASSERT_TRUE(trajectory.ok()) << trajectory.status();
  ASSERT_EQ(trajectory->size(), 101u);
  const Experiment ex = *Experiment::Create(config);
  EXPECT_NEAR(trajectory->front().mean_sq_error,
              ex.exact_solution().squaredNorm(), 1e-9);
  EXPECT_LT(trajectory->back().mean_sq_error,
            trajectory->front().mean_sq_error);
  EXPECT_EQ(trajectory->back().round, 100);
}

TEST(SweepTest, NetworkSizeReportsCalibrationFailures) {
  ExperimentConfig config = SmallConfig(SolverKind::kGt);
  config.trials = 2;
  config.gt_rounds = 50;
  // n = 3 leaves the shuffle calibration without a valid g.
  config.g = 2.0;
  auto sweep = SweepNetworkSize(config, {3});
  ASSERT_TRUE(sweep.ok()) << sweep.status();
  ASSERT_EQ(sweep->rows.size(), 6u);
  int failed = 0;
  for (const TrialRow& row : sweep->rows) failed += row.failed;
  EXPECT_EQ(failed, 2);
  ASSERT_EQ(sweep->warnings.size(), 1u);
  EXPECT_THAT(sweep->warnings[0], StartsWith("dishuf-ac n=3"));
}

TEST(SweepTest, EpsilonSweepUsesDiShuf) {
  ExperimentConfig config = SmallConfig(SolverKind::kGt);
  config.trials = 2;
  auto sweep = SweepEpsilon(config, {1.0, 5.0});
  ASSERT_TRUE(sweep.ok()) << sweep.status();
  ASSERT_EQ(sweep->rows.size(), 4u);
  EXPECT_EQ(sweep->rows[0].solver, SolverKind::kDiShufAc);
  EXPECT_EQ(sweep->rows[0].epsilon, 1.0);
  EXPECT_EQ(sweep->rows[3].epsilon, 5.0);
}

TEST(CalibrationTableTest, KeyValueLines) {
  ExperimentConfig config = SmallConfig(SolverKind::kGt);
  config.n = 10;
  config.m = 3;
  auto table = CalibrationTable(config);
  ASSERT_TRUE(table.ok()) << table.status();
  std::map<std::string, std::string> values;
  for (absl::string_view line : absl::StrSplit(*table, '\n', absl::SkipEmpty())) {
    const std::vector<std::string> kv = absl::StrSplit(line, '=');
    ASSERT_EQ(kv.size(), 2u) << line;
    values[kv[0]] = kv[1];
  }
  EXPECT_EQ(values["n"], "10");
  EXPECT_EQ(values["m"], "3");
  EXPECT_EQ(values["gt_feasible"], "0");
  EXPECT_NEAR(std::stod(values["lambda_min"]), 60.0, 1e-9);
  EXPECT_NEAR(std::stod(values["dishuf_log_sigma_eta_sq"]), 63.916314121108428,
              1e-9);
  EXPECT_GT(std::stod(values["gt_error_bound"]), 0.0);
}

TEST(WriteFileTest, WritesAndReportsErrors) {
  const std::string path = ::testing::TempDir() + "/dpls_harness_out.csv";
  ASSERT_TRUE(WriteFile(path, "abc\n").ok());
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "abc");
  EXPECT_FALSE(WriteFile("/nonexistent-dir/x.csv", "abc").ok());
}

}  // namespace
}  // namespace dpls
