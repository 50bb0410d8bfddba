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

// dpls: differentially private distributed least-squares experiments.

#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "dpls/acceptance.h"
#include "dpls/harness.h"
#include "dpls/paillier.h"

namespace {

using dpls::ExperimentConfig;

// Options shared by every experiment subcommand. Flags are kept as strings
// and replayed through the config parser so flags and config files accept
// identical syntax.
struct CommonFlags {
  std::string config_file;
  std::vector<std::string> assignments;
  std::map<std::string, std::string> values;
  bool no_validate = false;
  bool noise_off = false;
  std::string output = "-";
};

void AddCommon(CLI::App* app, CommonFlags& flags) {
  app->add_option("--config", flags.config_file, "key=value config file");
  app->add_option("--set", flags.assignments,
                  "extra key=value override (repeatable)");
  struct Keyed {
    const char* flag;
    const char* key;
    const char* help;
  };
  const Keyed keyed[] = {
      {"--solver", "solver", "gt | dishuf-ac | ac-baseline"},
      {"--n", "n", "number of agents"},
      {"--m", "m", "problem dimension"},
      {"--eps", "epsilon", "privacy epsilon"},
      {"--delta", "delta", "privacy delta"},
      {"--mu", "mu", "adjacency bound"},
      {"--trials", "trials", "Monte Carlo trials"},
      {"--seed", "seed", "master seed (required)"},
      {"--beta", "beta", "gradient-tracking step size"},
      {"--gt-rounds", "gt_rounds", "gradient-tracking rounds"},
      {"--ac-rounds", "ac_rounds", "consensus round cap, 0 = automatic"},
      {"--a-bar", "a_bar", "shuffle scalar bound (integer)"},
      {"--g", "g", "shuffle gain margin"},
      {"--d", "d", "truncation fraction when gamma_bar is none"},
      {"--gamma-bar", "gamma_bar", "truncation level, or none"},
      {"--backend", "backend", "paillier | plaintext"},
      {"--key-bits", "key_bits", "Paillier modulus size"},
      {"--jobs", "jobs", "worker threads"},
      {"--problem", "problem_file", "problem fixture file"},
      {"--network", "network_file", "network fixture file"},
      {"--edge-weight", "edge_weight", "cycle edge weight"},
  };
  for (const Keyed& k : keyed) {
    app->add_option(k.flag, flags.values[k.key], k.help);
  }
  app->add_flag("--no-validate", flags.no_validate,
                "skip the truncation/feasibility checks on the calibration");
  app->add_flag("--noise-off", flags.noise_off, "zero every noise term");
  app->add_option("-o,--output", flags.output, "output path, - for stdout");
}

absl::Status BuildConfig(const CommonFlags& flags,
                         const std::map<std::string, std::string>& defaults,
                         ExperimentConfig& config) {
  config.jobs = dpls::DefaultJobs();
  for (const auto& [key, value] : defaults) {
    if (absl::Status s = dpls::SetConfigValue(config, key, value); !s.ok()) {
      return s;
    }
  }
  if (!flags.config_file.empty()) {
    if (absl::Status s = dpls::ApplyConfigFile(config, flags.config_file);
        !s.ok()) {
      return s;
    }
  }
  for (const std::string& assignment : flags.assignments) {
    const size_t eq = assignment.find('=');
    if (eq == std::string::npos) {
      return absl::InvalidArgumentError(
          absl::StrCat("--set expects key=value, got '", assignment, "'"));
    }
    if (absl::Status s = dpls::SetConfigValue(
            config, assignment.substr(0, eq), assignment.substr(eq + 1));
        !s.ok()) {
      return s;
    }
  }
  for (const auto& [key, value] : flags.values) {
    if (value.empty()) continue;
    if (absl::Status s = dpls::SetConfigValue(config, key, value); !s.ok()) {
      return s;
    }
  }
  if (flags.no_validate) config.validate = false;
  if (flags.noise_off) config.noise_off = true;
  return dpls::ValidateConfig(config);
}

int Report(const absl::Status& status) {
  std::cerr << "dpls: " << status.message() << "\n";
  return 1;
}

void WarnFailures(const std::vector<dpls::TrialRow>& rows) {
  for (const dpls::TrialRow& row : rows) {
    if (row.failed) {
      std::cerr << "warning: " << dpls::SolverName(row.solver) << " n=" << row.n
                << " trial " << row.trial << " failed: " << row.failure
                << "\n";
    }
  }
}

template <typename T>
absl::StatusOr<std::vector<T>> ParseList(const std::string& text) {
  std::vector<T> out;
  for (absl::string_view part : absl::StrSplit(text, ',', absl::SkipEmpty())) {
    T v;
    bool ok;
    if constexpr (std::is_same_v<T, int>) {
      ok = absl::SimpleAtoi(part, &v);
    } else {
      ok = absl::SimpleAtod(part, &v);
    }
    if (!ok) {
      return absl::InvalidArgumentError(
          absl::StrCat("bad list entry '", part, "'"));
    }
    out.push_back(v);
  }
  if (out.empty()) return absl::InvalidArgumentError("empty list");
  return out;
}

int RunSweep(const dpls::SweepResult& sweep, const std::string& output) {
  for (const std::string& w : sweep.warnings) std::cerr << "warning: " << w << "\n";
  std::ostringstream csv;
  dpls::WriteTrialsHeader(csv);
  dpls::WriteTrialRows(csv, sweep.rows);
  if (absl::Status s = dpls::WriteFile(output, csv.str()); !s.ok()) {
    return Report(s);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private distributed least-squares solvers"};
  app.require_subcommand(1);

  CommonFlags run_flags, eps_flags, n_flags, traj_flags, calib_flags;
  CLI::App* run = app.add_subcommand("run", "one experiment, trials to CSV");
  AddCommon(run, run_flags);

  CLI::App* sweep_eps =
      app.add_subcommand("sweep-eps", "DiShuf-AC errors over epsilon");
  AddCommon(sweep_eps, eps_flags);
  std::string eps_list = "0.5,1,2,5,10";
  sweep_eps->add_option("--eps-list", eps_list, "comma-separated epsilons");

  CLI::App* sweep_n =
      app.add_subcommand("sweep-n", "all three solvers over network sizes");
  AddCommon(sweep_n, n_flags);
  std::string size_list = "10,50";
  sweep_n->add_option("--sizes", size_list,
                      "comma-separated n (250 works but is slow)");

  CLI::App* trajectory =
      app.add_subcommand("trajectory", "trial-averaged DP-GT error per round");
  AddCommon(trajectory, traj_flags);

  CLI::App* calibrate =
      app.add_subcommand("calibrate", "noise calibration table");
  AddCommon(calibrate, calib_flags);

  CLI::App* verify = app.add_subcommand("verify", "acceptance suite");
  std::string filter;
  verify->add_option("--filter", filter, "run criteria whose name contains");

  CLI::App* selftest =
      app.add_subcommand("paillier-selftest", "Paillier correctness checks");
  dpls::paillier::SelfTestOptions st;
  selftest->add_option("--small-bits", st.small_key_bits);
  selftest->add_option("--exhaustive-max", st.exhaustive_max);
  selftest->add_option("--full-bits", st.full_key_bits);
  selftest->add_option("--round-trips", st.random_round_trips);
  selftest->add_option("--seed", st.seed);

  CLI11_PARSE(app, argc, argv);

  // Sweeps default to the plaintext shuffle backend; it yields the same
  // integers as the encrypted one at a fraction of the cost.
  const std::map<std::string, std::string> sweep_defaults = {
      {"backend", "plaintext"}};

  if (run->parsed()) {
    ExperimentConfig config;
    if (absl::Status s = BuildConfig(run_flags, {}, config); !s.ok()) {
      return Report(s);
    }
    auto result = dpls::MonteCarlo(config);
    if (!result.ok()) return Report(result.status());
    WarnFailures(result->rows);
    std::ostringstream csv;
    dpls::WriteTrialsHeader(csv);
    dpls::WriteTrialRows(csv, result->rows);
    if (absl::Status s = dpls::WriteFile(run_flags.output, csv.str()); !s.ok()) {
      return Report(s);
    }
    dpls::WriteSummary(std::cerr, dpls::SolverName(config.solver), *result);
    return 0;
  }
  if (sweep_eps->parsed()) {
    ExperimentConfig config;
    if (absl::Status s = BuildConfig(eps_flags, sweep_defaults, config);
        !s.ok()) {
      return Report(s);
    }
    auto eps = ParseList<double>(eps_list);
    if (!eps.ok()) return Report(eps.status());
    auto sweep = dpls::SweepEpsilon(config, *eps);
    if (!sweep.ok()) return Report(sweep.status());
    return RunSweep(*sweep, eps_flags.output);
  }
  if (sweep_n->parsed()) {
    ExperimentConfig config;
    std::map<std::string, std::string> defaults = sweep_defaults;
    defaults["gt_rounds"] = "20000";
    if (absl::Status s = BuildConfig(n_flags, defaults, config); !s.ok()) {
      return Report(s);
    }
    auto sizes = ParseList<int>(size_list);
    if (!sizes.ok()) return Report(sizes.status());
    auto sweep = dpls::SweepNetworkSize(config, *sizes);
    if (!sweep.ok()) return Report(sweep.status());
    return RunSweep(*sweep, n_flags.output);
  }
  if (trajectory->parsed()) {
    ExperimentConfig config;
    if (absl::Status s = BuildConfig(traj_flags, {}, config); !s.ok()) {
      return Report(s);
    }
    auto points = dpls::MeanTrajectory(config);
    if (!points.ok()) return Report(points.status());
    std::ostringstream csv;
    dpls::WriteTrajectory(csv, *points);
    if (absl::Status s = dpls::WriteFile(traj_flags.output, csv.str());
        !s.ok()) {
      return Report(s);
    }
    return 0;
  }
  if (calibrate->parsed()) {
    ExperimentConfig config;
    if (absl::Status s = BuildConfig(calib_flags, {}, config); !s.ok()) {
      return Report(s);
    }
    auto table = dpls::CalibrationTable(config);
    if (!table.ok()) return Report(table.status());
    if (absl::Status s = dpls::WriteFile(calib_flags.output, *table); !s.ok()) {
      return Report(s);
    }
    return 0;
  }
  if (verify->parsed()) {
    const auto results = dpls::RunAcceptance(std::cout, filter);
    int failed = 0;
    for (const auto& r : results) failed += r.passed ? 0 : 1;
    std::cout << results.size() - failed << "/" << results.size()
              << " criteria passed\n";
    return failed == 0 ? 0 : 1;
  }
  if (selftest->parsed()) {
    auto report = dpls::paillier::SelfTest(st);
    if (!report.ok()) return Report(report.status());
    std::cout << "paillier self-test ok: " << report->exhaustive_checks
              << " exhaustive checks, " << report->round_trips
              << " round trips\n";
    return 0;
  }
  return 0;
}
