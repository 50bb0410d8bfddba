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

#ifndef DPLS_HARNESS_H_
#define DPLS_HARNESS_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "dpls/graph.h"
#include "dpls/mechanisms.h"
#include "dpls/problem.h"
#include "dpls/solvers.h"

namespace dpls {

enum class SolverKind { kGt, kDiShufAc, kAcBaseline };

absl::StatusOr<SolverKind> ParseSolverKind(absl::string_view name);
std::string SolverName(SolverKind kind);

// Defaults are the case-study constants. The random instance is rescaled so
// that lambda_min(A) and ||B|| hit the two targets.
struct ExperimentConfig {
  SolverKind solver = SolverKind::kGt;
  int n = 10;
  int m = 3;
  double edge_weight = 0.3;
  // Fixture files replace the random instance / cycle when set.
  std::string problem_file;
  std::string network_file;
  double lambda_target = 60.0;
  double b_norm_target = 60.0;

  double epsilon = 10.0;
  double delta = 0.2;
  double mu = 3.0;

  double beta = 0.005;
  int gt_rounds = 2000;
  double early_stop_tolerance = 1e-12;
  double d = 0.5;
  std::optional<double> gamma_bar = 3.1;

  // 0 picks the consensus horizon from the initial spread.
  int ac_rounds = 0;
  double consensus_tolerance = 1e-9;
  double a_bar = 100.0;
  double g = 0.01;
  int key_bits = 1024;
  DiShufBackend backend = DiShufBackend::kPaillier;

  int trials = 100;
  std::optional<uint64_t> seed;
  bool validate = true;
  bool noise_off = false;
  int jobs = 1;
  // Error-path seam: zeroes the reconstructed A_hat in consensus solvers.
  bool debug_force_singular = false;
};

// One "key = value" assignment. Keys match the field names above; solver
// takes gt | dishuf-ac | ac-baseline, backend paillier | plaintext, and
// gamma_bar accepts "none" to derive it from d.
absl::Status SetConfigValue(ExperimentConfig& config, absl::string_view key,
                            absl::string_view value);

// Flat key=value text; '#' starts a comment, blank lines are skipped.
absl::Status ApplyConfigText(ExperimentConfig& config, absl::string_view text);
absl::Status ApplyConfigFile(ExperimentConfig& config, const std::string& path);

absl::Status ValidateConfig(const ExperimentConfig& config);

// DPLS_JOBS if set and positive, else 1.
int DefaultJobs();

struct TrialRow {
  int trial = 0;
  SolverKind solver = SolverKind::kGt;
  int n = 0;
  int m = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  double mu = 0.0;
  double error_sq = 0.0;
  double mean_agent_error_sq = 0.0;
  int iterations = 0;
  bool failed = false;
  std::string failure;
  double wall_seconds = 0.0;
  // Solver-specific extras, not written to the CSV.
  double theta_error_sq = 0.0;
  double limit_error_sq = 0.0;
  bool hessian_positive_definite = true;
  std::vector<TrajectoryPoint> trajectory;
};

struct Summary {
  int count = 0;
  int failed = 0;
  double mean = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double min = 0.0;
  double max = 0.0;
};

// Inclusive linear-interpolation quantile: position p (k - 1) in the sorted
// sample.
double Quantile(std::vector<double> values, double p);
Summary Summarize(const std::vector<double>& values, int failed = 0);

// Instance, network and calibration shared by every trial of a config.
class Experiment {
 public:
  static absl::StatusOr<Experiment> Create(const ExperimentConfig& config);

  const ExperimentConfig& config() const { return config_; }
  const GlobalProblem& problem() const { return *problem_; }
  const Network& network() const { return *network_; }
  const PrivacyBudget& budget() const { return *budget_; }
  const Vector& exact_solution() const { return x_star_; }
  const std::optional<GtNoiseCalibration>& gt_calibration() const {
    return gt_calib_;
  }
  const std::optional<DiShufCalibration>& dishuf_calibration() const {
    return dishuf_calib_;
  }
  double baseline_sigma() const { return baseline_sigma_; }

  // Solver errors come back as a failed row, never as a status.
  TrialRow RunTrial(int trial, bool record_trajectory = false) const;

 private:
  Experiment() = default;

  ExperimentConfig config_;
  std::optional<GlobalProblem> problem_;
  std::optional<Network> network_;
  std::optional<PrivacyBudget> budget_;
  Vector x_star_;
  std::optional<GtNoiseCalibration> gt_calib_;
  std::optional<DiShufCalibration> dishuf_calib_;
  double baseline_sigma_ = 0.0;
};

struct MonteCarloResult {
  std::vector<TrialRow> rows;
  // Over error_sq and mean_agent_error_sq of the rows that did not fail.
  Summary error;
  Summary mean_agent_error;
};

// Trial t draws from DeriveSeed(seed, t + 1); stream 0 builds the instance.
absl::StatusOr<MonteCarloResult> MonteCarlo(const ExperimentConfig& config);
absl::StatusOr<MonteCarloResult> MonteCarlo(const Experiment& experiment);

// Trial-averaged GT trajectory.
absl::StatusOr<std::vector<TrajectoryPoint>> MeanTrajectory(
    const ExperimentConfig& config);

inline constexpr absl::string_view kSchemaLine = "# dpls schema v1";

void WriteTrialsHeader(std::ostream& out);
void WriteTrialRows(std::ostream& out, const std::vector<TrialRow>& rows);
void WriteTrajectory(std::ostream& out,
                     const std::vector<TrajectoryPoint>& trajectory);
void WriteSummary(std::ostream& out, absl::string_view label,
                  const MonteCarloResult& result);

// Writes to a path, or to stdout when path is "-".
absl::Status WriteFile(const std::string& path, const std::string& contents);

struct SweepResult {
  std::vector<TrialRow> rows;
  std::vector<std::string> warnings;
};

// DiShuf-AC over each epsilon.
absl::StatusOr<SweepResult> SweepEpsilon(ExperimentConfig config,
                                         const std::vector<double>& epsilons);

// All three solvers over each network size. A config whose calibration
// fails contributes failed rows and a warning.
absl::StatusOr<SweepResult> SweepNetworkSize(ExperimentConfig config,
                                             const std::vector<int>& sizes);

// Calibration table for the config as "key=value" lines.
absl::StatusOr<std::string> CalibrationTable(const ExperimentConfig& config);

}  // namespace dpls

#endif  // DPLS_HARNESS_H_
