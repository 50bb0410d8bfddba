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
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>
#include <utility>

#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "dpls/random.h"
#include "dpls/status_macros.h"

namespace dpls {
namespace {

absl::Status BadValue(absl::string_view key, absl::string_view value) {
  return absl::InvalidArgumentError(
      absl::StrCat("bad value for ", key, ": '", value, "'"));
}

absl::Status ParseInt(absl::string_view key, absl::string_view value, int& out) {
  if (!absl::SimpleAtoi(value, &out)) return BadValue(key, value);
  return absl::OkStatus();
}

absl::Status ParseDouble(absl::string_view key, absl::string_view value,
                         double& out) {
  if (!absl::SimpleAtod(value, &out) || !std::isfinite(out)) {
    return BadValue(key, value);
  }
  return absl::OkStatus();
}

absl::Status ParseBool(absl::string_view key, absl::string_view value,
                       bool& out) {
  if (value == "true" || value == "1" || value == "yes") {
    out = true;
  } else if (value == "false" || value == "0" || value == "no") {
    out = false;
  } else {
    return BadValue(key, value);
  }
  return absl::OkStatus();
}

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string Num(double v) {
  if (std::isnan(v)) return "nan";
  return absl::StrFormat("%.17g", v);
}

double MeanSquare(const std::vector<Vector>& xs, const Vector& target) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  double total = 0.0;
  for (const Vector& x : xs) total += (x - target).squaredNorm();
  return total / xs.size();
}

Vector ThetaSum(const GlobalProblem& problem) {
  Vector total = Vector::Zero(ThetaSize(problem.dim()));
  for (const QuadraticCost& cost : problem.costs()) {
    total += PackTheta(cost).values();
  }
  return total;
}

}  // namespace

absl::StatusOr<SolverKind> ParseSolverKind(absl::string_view name) {
  if (name == "gt") return SolverKind::kGt;
  if (name == "dishuf-ac") return SolverKind::kDiShufAc;
  if (name == "ac-baseline") return SolverKind::kAcBaseline;
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown solver '", name, "' (gt | dishuf-ac | ac-baseline)"));
}

std::string SolverName(SolverKind kind) {
  switch (kind) {
    case SolverKind::kGt:
      return "gt";
    case SolverKind::kDiShufAc:
      return "dishuf-ac";
    case SolverKind::kAcBaseline:
      return "ac-baseline";
  }
  return "unknown";
}

absl::Status SetConfigValue(ExperimentConfig& config, absl::string_view key,
                            absl::string_view value) {
  key = absl::StripAsciiWhitespace(key);
  value = absl::StripAsciiWhitespace(value);
  if (key == "solver") {
    DPLS_ASSIGN_OR_RETURN(config.solver, ParseSolverKind(value));
  } else if (key == "n") {
    return ParseInt(key, value, config.n);
  } else if (key == "m") {
    return ParseInt(key, value, config.m);
  } else if (key == "edge_weight") {
    return ParseDouble(key, value, config.edge_weight);
  } else if (key == "problem_file") {
    config.problem_file = std::string(value);
  } else if (key == "network_file") {
    config.network_file = std::string(value);
  } else if (key == "lambda_target") {
    return ParseDouble(key, value, config.lambda_target);
  } else if (key == "b_norm_target") {
    return ParseDouble(key, value, config.b_norm_target);
  } else if (key == "epsilon" || key == "eps") {
    return ParseDouble(key, value, config.epsilon);
  } else if (key == "delta") {
    return ParseDouble(key, value, config.delta);
  } else if (key == "mu") {
    return ParseDouble(key, value, config.mu);
  } else if (key == "beta") {
    return ParseDouble(key, value, config.beta);
  } else if (key == "gt_rounds") {
    return ParseInt(key, value, config.gt_rounds);
  } else if (key == "early_stop_tolerance") {
    return ParseDouble(key, value, config.early_stop_tolerance);
  } else if (key == "d") {
    return ParseDouble(key, value, config.d);
  } else if (key == "gamma_bar") {
    if (value == "none") {
      config.gamma_bar.reset();
    } else {
      double v = 0.0;
      DPLS_RETURN_IF_ERROR(ParseDouble(key, value, v));
      config.gamma_bar = v;
    }
  } else if (key == "ac_rounds") {
    return ParseInt(key, value, config.ac_rounds);
  } else if (key == "consensus_tolerance") {
    return ParseDouble(key, value, config.consensus_tolerance);
  } else if (key == "a_bar") {
    return ParseDouble(key, value, config.a_bar);
  } else if (key == "g") {
    return ParseDouble(key, value, config.g);
  } else if (key == "key_bits") {
    return ParseInt(key, value, config.key_bits);
  } else if (key == "backend") {
    if (value == "paillier") {
      config.backend = DiShufBackend::kPaillier;
    } else if (value == "plaintext") {
      config.backend = DiShufBackend::kPlaintext;
    } else {
      return BadValue(key, value);
    }
  } else if (key == "trials") {
    return ParseInt(key, value, config.trials);
  } else if (key == "seed") {
    uint64_t seed = 0;
    if (!absl::SimpleAtoi(value, &seed)) return BadValue(key, value);
    config.seed = seed;
  } else if (key == "validate") {
    return ParseBool(key, value, config.validate);
  } else if (key == "noise_off") {
    return ParseBool(key, value, config.noise_off);
  } else if (key == "jobs") {
    return ParseInt(key, value, config.jobs);
  } else if (key == "debug_force_singular") {
    return ParseBool(key, value, config.debug_force_singular);
  } else {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown config key '", key, "'"));
  }
  return absl::OkStatus();
}

absl::Status ApplyConfigText(ExperimentConfig& config, absl::string_view text) {
  int line_number = 0;
  for (absl::string_view line : absl::StrSplit(text, '\n')) {
    ++line_number;
    const size_t hash = line.find('#');
    if (hash != absl::string_view::npos) line = line.substr(0, hash);
    line = absl::StripAsciiWhitespace(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == absl::string_view::npos) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_number, ": expected key=value"));
    }
    absl::Status status =
        SetConfigValue(config, line.substr(0, eq), line.substr(eq + 1));
    if (!status.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_number, ": ", status.message()));
    }
  }
  return absl::OkStatus();
}

absl::Status ApplyConfigFile(ExperimentConfig& config,
                             const std::string& path) {
  DPLS_ASSIGN_OR_RETURN(const std::string text, ReadFile(path));
  return ApplyConfigText(config, text);
}

absl::Status ValidateConfig(const ExperimentConfig& config) {
  if (!config.seed) {
    return absl::InvalidArgumentError("seed is required");
  }
  if (config.problem_file.empty() && (config.n < 2 || config.m < 1)) {
    return absl::InvalidArgumentError("need n >= 2 and m >= 1");
  }
  if (config.trials < 1) {
    return absl::InvalidArgumentError("trials must be >= 1");
  }
  if (config.jobs < 1) return absl::InvalidArgumentError("jobs must be >= 1");
  if (config.gt_rounds < 0) {
    return absl::InvalidArgumentError("gt_rounds must be >= 0");
  }
  if (config.ac_rounds < 0) {
    return absl::InvalidArgumentError("ac_rounds must be >= 0");
  }
  if (!(config.beta > 0.0)) {
    return absl::InvalidArgumentError("beta must be > 0");
  }
  if (!(config.consensus_tolerance > 0.0)) {
    return absl::InvalidArgumentError("consensus_tolerance must be > 0");
  }
  if (!(config.lambda_target > 0.0) || !(config.b_norm_target > 0.0)) {
    return absl::InvalidArgumentError("instance targets must be > 0");
  }
  return absl::OkStatus();
}

int DefaultJobs() {
  const char* env = std::getenv("DPLS_JOBS");
  int jobs = 0;
  if (env != nullptr && absl::SimpleAtoi(env, &jobs) && jobs > 0) return jobs;
  return 1;
}

double Quantile(std::vector<double> values, double p) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = p * (values.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - lo) * (values[hi] - values[lo]);
}

Summary Summarize(const std::vector<double>& values, int failed) {
  Summary s;
  s.count = static_cast<int>(values.size());
  s.failed = failed;
  if (values.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.mean = s.q1 = s.median = s.q3 = s.min = s.max = nan;
    return s;
  }
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / values.size();
  s.q1 = Quantile(values, 0.25);
  s.median = Quantile(values, 0.5);
  s.q3 = Quantile(values, 0.75);
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  return s;
}

absl::StatusOr<Experiment> Experiment::Create(const ExperimentConfig& config) {
  DPLS_RETURN_IF_ERROR(ValidateConfig(config));
  Experiment ex;
  ex.config_ = config;

  if (!config.problem_file.empty()) {
    DPLS_ASSIGN_OR_RETURN(const std::string text, ReadFile(config.problem_file));
    DPLS_ASSIGN_OR_RETURN(GlobalProblem problem, ParseProblem(text));
    ex.problem_.emplace(std::move(problem));
  } else {
    Rng instance_rng(DeriveSeed(*config.seed, 0));
    RandomProblemOptions options;
    options.lambda_target = config.lambda_target;
    options.b_norm_target = config.b_norm_target;
    ex.problem_.emplace(
        RandomProblem(config.n, config.m, instance_rng, options));
  }
  const int n = ex.problem_->num_agents();
  ex.config_.n = n;
  ex.config_.m = ex.problem_->dim();

  if (!config.network_file.empty()) {
    DPLS_ASSIGN_OR_RETURN(const std::string text, ReadFile(config.network_file));
    DPLS_ASSIGN_OR_RETURN(Network net, ParseNetwork(text));
    ex.network_.emplace(std::move(net));
  } else {
    DPLS_ASSIGN_OR_RETURN(Network net, BuildCycle(n, config.edge_weight));
    ex.network_.emplace(std::move(net));
  }
  if (ex.network_->size() != n) {
    return absl::InvalidArgumentError(absl::StrCat(
        "network has ", ex.network_->size(), " agents, problem has ", n));
  }
  DPLS_ASSIGN_OR_RETURN(
      PrivacyBudget budget,
      PrivacyBudget::Create(config.epsilon, config.delta, config.mu));
  ex.budget_.emplace(budget);
  ex.x_star_ = ExactSolution(*ex.problem_);

  switch (config.solver) {
    case SolverKind::kGt: {
      GtCalibrationOptions options;
      options.d = config.d;
      options.gamma_bar_override = config.gamma_bar;
      options.validate = config.validate;
      DPLS_ASSIGN_OR_RETURN(GtNoiseCalibration calib,
                            CalibrateGt(budget, *ex.problem_, options));
      ex.gt_calib_ = calib;
      break;
    }
    case SolverKind::kDiShufAc: {
      DPLS_ASSIGN_OR_RETURN(DiShufCalibration calib,
                            CalibrateDiShuf(budget, n, config.a_bar, config.g));
      ex.dishuf_calib_ = calib;
      break;
    }
    case SolverKind::kAcBaseline: {
      DPLS_ASSIGN_OR_RETURN(const double kappa_bar,
                            KappaInverse(budget.epsilon(), budget.delta()));
      ex.baseline_sigma_ = budget.mu() / kappa_bar;
      break;
    }
  }
  return ex;
}

TrialRow Experiment::RunTrial(int trial, bool record_trajectory) const {
  const auto start = std::chrono::steady_clock::now();
  TrialRow row;
  row.trial = trial;
  row.solver = config_.solver;
  row.n = problem_->num_agents();
  row.m = problem_->dim();
  row.epsilon = budget_->epsilon();
  row.delta = budget_->delta();
  row.mu = budget_->mu();

  Rng rng(DeriveSeed(*config_.seed, static_cast<uint64_t>(trial) + 1));
  AcOptions ac;
  ac.rounds = config_.ac_rounds;
  ac.consensus_tolerance = config_.consensus_tolerance;
  ac.noise_off = config_.noise_off;
  ac.dishuf.a_bar = config_.a_bar;
  ac.dishuf.key_bits = config_.key_bits;
  ac.dishuf.backend = config_.backend;
  if (config_.debug_force_singular) {
    const int packed = PackedSize(problem_->dim());
    ac.theta_hat_hook = [packed](int, std::vector<Vector>& theta_hats) {
      for (Vector& theta : theta_hats) theta.head(packed).setZero();
    };
  }

  absl::StatusOr<SolveOutcome> outcome;
  switch (config_.solver) {
    case SolverKind::kGt: {
      GtOptions options;
      options.beta = config_.beta;
      options.rounds = config_.gt_rounds;
      options.early_stop_tolerance =
          record_trajectory ? 0.0 : config_.early_stop_tolerance;
      options.noise_off = config_.noise_off;
      options.record_trajectory = record_trajectory;
      outcome = DpGtSolve(*problem_, *network_, *budget_, *gt_calib_, options,
                          rng);
      break;
    }
    case SolverKind::kDiShufAc:
      outcome = DpDiShufAcSolve(*problem_, *network_, *dishuf_calib_, ac, rng);
      break;
    case SolverKind::kAcBaseline:
      outcome =
          DpAcBaselineSolve(*problem_, *network_, baseline_sigma_, ac, rng);
      break;
  }

  if (!outcome.ok()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.failed = true;
    row.failure = std::string(outcome.status().message());
    row.error_sq = row.mean_agent_error_sq = nan;
    row.theta_error_sq = row.limit_error_sq = nan;
  } else {
    row.error_sq = (outcome->x_hat - x_star_).squaredNorm();
    row.mean_agent_error_sq = MeanSquare(outcome->agent_solutions, x_star_);
    row.iterations = outcome->iterations;
    row.hessian_positive_definite = outcome->hessian_positive_definite;
    row.trajectory = std::move(outcome->trajectory);
    if (outcome->limit) {
      row.limit_error_sq = (*outcome->limit - x_star_).squaredNorm();
    }
    if (outcome->theta_hat.size() > 0) {
      row.theta_error_sq =
          (outcome->theta_hat - ThetaSum(*problem_)).squaredNorm();
    }
  }
  row.wall_seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
  return row;
}

absl::StatusOr<MonteCarloResult> MonteCarlo(const ExperimentConfig& config) {
  DPLS_ASSIGN_OR_RETURN(const Experiment experiment, Experiment::Create(config));
  return MonteCarlo(experiment);
}

absl::StatusOr<MonteCarloResult> MonteCarlo(const Experiment& experiment) {
  const ExperimentConfig& config = experiment.config();
  MonteCarloResult result;
  result.rows.resize(config.trials);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int t = next++; t < config.trials; t = next++) {
      result.rows[t] = experiment.RunTrial(t);
    }
  };
  const int jobs = std::min(config.jobs, config.trials);
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  std::vector<double> errors;
  std::vector<double> agent_errors;
  int failed = 0;
  for (const TrialRow& row : result.rows) {
    if (row.failed) {
      ++failed;
      continue;
    }
    errors.push_back(row.error_sq);
    agent_errors.push_back(row.mean_agent_error_sq);
  }
  result.error = Summarize(errors, failed);
  result.mean_agent_error = Summarize(agent_errors, failed);
  return result;
}

absl::StatusOr<std::vector<TrajectoryPoint>> MeanTrajectory(
    const ExperimentConfig& config) {
  ExperimentConfig gt = config;
  gt.solver = SolverKind::kGt;
  DPLS_ASSIGN_OR_RETURN(const Experiment experiment, Experiment::Create(gt));
  std::vector<TrajectoryPoint> mean;
  for (int t = 0; t < gt.trials; ++t) {
    TrialRow row = experiment.RunTrial(t, /*record_trajectory=*/true);
    if (row.failed) {
      return absl::FailedPreconditionError(
          absl::StrCat("trial ", t, ": ", row.failure));
    }
    if (mean.empty()) {
      mean.resize(row.trajectory.size(), TrajectoryPoint{0, 0.0, 0.0});
    }
    for (size_t k = 0; k < mean.size(); ++k) {
      mean[k].round = row.trajectory[k].round;
      mean[k].mean_sq_error += row.trajectory[k].mean_sq_error / gt.trials;
      mean[k].mean_sq_to_limit +=
          row.trajectory[k].mean_sq_to_limit / gt.trials;
    }
  }
  return mean;
}

void WriteTrialsHeader(std::ostream& out) {
  out << kSchemaLine << "\n"
      << "trial,solver,n,m,eps,delta,mu,error_sq,mean_agent_error_sq,iters,"
         "failed\n";
}

void WriteTrialRows(std::ostream& out, const std::vector<TrialRow>& rows) {
  for (const TrialRow& r : rows) {
    out << r.trial << ',' << SolverName(r.solver) << ',' << r.n << ',' << r.m
        << ',' << Num(r.epsilon) << ',' << Num(r.delta) << ',' << Num(r.mu)
        << ',' << Num(r.error_sq) << ',' << Num(r.mean_agent_error_sq) << ','
        << r.iterations << ',' << (r.failed ? 1 : 0) << '\n';
  }
}

void WriteTrajectory(std::ostream& out,
                     const std::vector<TrajectoryPoint>& trajectory) {
  out << kSchemaLine << "\n" << "round,mean_sq_error\n";
  for (const TrajectoryPoint& p : trajectory) {
    out << p.round << ',' << Num(p.mean_sq_error) << '\n';
  }
}

void WriteSummary(std::ostream& out, absl::string_view label,
                  const MonteCarloResult& result) {
  const Summary& s = result.mean_agent_error;
  out << absl::StrFormat(
      "%s: ok=%d failed=%d mean=%.6g q1=%.6g median=%.6g q3=%.6g\n", label,
      s.count, s.failed, s.mean, s.q1, s.median, s.q3);
}

absl::Status WriteFile(const std::string& path, const std::string& contents) {
  if (path == "-") {
    std::cout << contents;
    return absl::OkStatus();
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out << contents;
  if (!out) return absl::DataLossError(absl::StrCat("short write to ", path));
  return absl::OkStatus();
}

namespace {

// Failed placeholder rows for a config that never got to run.
void AppendFailedRows(const ExperimentConfig& config, absl::string_view why,
                      SweepResult& sweep) {
  sweep.warnings.push_back(absl::StrCat(SolverName(config.solver), " n=",
                                        config.n, " eps=", config.epsilon,
                                        ": ", why));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int t = 0; t < config.trials; ++t) {
    TrialRow row;
    row.trial = t;
    row.solver = config.solver;
    row.n = config.n;
    row.m = config.m;
    row.epsilon = config.epsilon;
    row.delta = config.delta;
    row.mu = config.mu;
    row.error_sq = row.mean_agent_error_sq = nan;
    row.failed = true;
    row.failure = std::string(why);
    sweep.rows.push_back(row);
  }
}

absl::Status RunInto(const ExperimentConfig& config, SweepResult& sweep) {
  auto experiment = Experiment::Create(config);
  if (!experiment.ok()) {
    if (absl::IsInvalidArgument(experiment.status())) {
      return experiment.status();
    }
    AppendFailedRows(config, experiment.status().message(), sweep);
    return absl::OkStatus();
  }
  DPLS_ASSIGN_OR_RETURN(MonteCarloResult result, MonteCarlo(*experiment));
  for (const TrialRow& row : result.rows) {
    if (row.failed) {
      sweep.warnings.push_back(absl::StrCat(SolverName(row.solver), " n=",
                                            row.n, " trial ", row.trial, ": ",
                                            row.failure));
    }
  }
  sweep.rows.insert(sweep.rows.end(), result.rows.begin(), result.rows.end());
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<SweepResult> SweepEpsilon(ExperimentConfig config,
                                         const std::vector<double>& epsilons) {
  SweepResult sweep;
  config.solver = SolverKind::kDiShufAc;
  for (double eps : epsilons) {
    config.epsilon = eps;
    DPLS_RETURN_IF_ERROR(RunInto(config, sweep));
  }
  return sweep;
}

absl::StatusOr<SweepResult> SweepNetworkSize(ExperimentConfig config,
                                             const std::vector<int>& sizes) {
  SweepResult sweep;
  for (int n : sizes) {
    config.n = n;
    for (SolverKind kind : {SolverKind::kGt, SolverKind::kDiShufAc,
                            SolverKind::kAcBaseline}) {
      config.solver = kind;
      DPLS_RETURN_IF_ERROR(RunInto(config, sweep));
    }
  }
  return sweep;
}

absl::StatusOr<std::string> CalibrationTable(const ExperimentConfig& config) {
  ExperimentConfig base = config;
  base.solver = SolverKind::kAcBaseline;
  DPLS_ASSIGN_OR_RETURN(const Experiment experiment, Experiment::Create(base));
  const GlobalProblem& problem = experiment.problem();
  const PrivacyBudget& budget = experiment.budget();
  std::string out;
  auto add = [&out](absl::string_view key, const std::string& value) {
    absl::StrAppend(&out, key, "=", value, "\n");
  };
  add("n", absl::StrCat(problem.num_agents()));
  add("m", absl::StrCat(problem.dim()));
  add("lambda_min", Num(problem.lambda_min()));
  add("x_star_norm_sq", Num(experiment.exact_solution().squaredNorm()));
  DPLS_ASSIGN_OR_RETURN(const double rate, ConsensusRate(experiment.network()));
  add("consensus_rate", Num(rate));
  add("baseline_sigma", Num(experiment.baseline_sigma()));

  GtCalibrationOptions gt_options;
  gt_options.d = config.d;
  gt_options.gamma_bar_override = config.gamma_bar;
  gt_options.validate = config.validate;
  auto gt = CalibrateGt(budget, problem, gt_options);
  if (gt.ok()) {
    add("gt_gamma_bar", Num(gt->gamma_bar));
    add("gt_c", Num(gt->c));
    add("gt_d", Num(gt->d));
    add("gt_sigma_eta", Num(gt->sigma_eta));
    add("gt_sigma_gamma_sq", Num(gt->sigma_gamma_sq));
    add("gt_delta_lower_bound", Num(gt->delta_lower_bound));
    add("gt_feasible", gt->feasible ? "1" : "0");
    add("gt_error_bound", Num(GtMeanSquareErrorBound(problem, *gt)));
  } else {
    add("gt_error", absl::StrCat("\"", gt.status().message(), "\""));
  }

  auto dishuf = CalibrateDiShuf(budget, problem.num_agents(), config.a_bar,
                                config.g);
  if (dishuf.ok()) {
    add("dishuf_kappa_bar", Num(dishuf->kappa_bar));
    add("dishuf_sigma_gamma", Num(dishuf->sigma_gamma));
    add("dishuf_log_sigma_eta_sq", Num(dishuf->log_sigma_eta_sq));
    add("dishuf_sigma_eta_sq", Num(dishuf->sigma_eta_sq));
    add("dishuf_alpha", Num(dishuf->contraction.alpha));
    add("dishuf_log_one_minus_alpha",
        Num(dishuf->contraction.log_one_minus_alpha));
    add("dishuf_zeta", Num(dishuf->zeta));
  } else {
    add("dishuf_error", absl::StrCat("\"", dishuf.status().message(), "\""));
  }
  return out;
}

}  // namespace dpls
