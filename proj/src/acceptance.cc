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

#include "dpls/acceptance.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "dpls/dishuf.h"
#include "dpls/graph.h"
#include "dpls/harness.h"
#include "dpls/mechanisms.h"
#include "dpls/paillier.h"
#include "dpls/problem.h"
#include "dpls/random.h"
#include "dpls/solvers.h"

namespace dpls {
namespace {

using Clock = std::chrono::steady_clock;

double Since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

CriterionResult Fail(std::string name, std::string detail) {
  return {std::move(name), false, std::move(detail), 0.0};
}

// Case-study defaults with the calibration checks bypassed.
ExperimentConfig CaseStudyConfig(uint64_t seed) {
  ExperimentConfig config;
  config.seed = seed;
  config.validate = false;
  config.backend = DiShufBackend::kPlaintext;
  return config;
}

RandomProblemOptions NormalizedInstance() {
  RandomProblemOptions options;
  options.lambda_target = 60.0;
  options.b_norm_target = 60.0;
  return options;
}

// Truncated Laplace on [-gbar, gbar] with scale b, written out directly.
struct TruncatedLaplaceOracle {
  double b;
  double gbar;

  double Mass() const { return 1.0 - std::exp(-gbar / b); }
  double Pdf(double x) const {
    if (std::abs(x) > gbar) return 0.0;
    return std::exp(-std::abs(x) / b) / (2.0 * b * Mass());
  }
  double Cdf(double x) const {
    if (x <= -gbar) return 0.0;
    if (x >= gbar) return 1.0;
    const double tail = std::exp(-gbar / b);
    if (x < 0) return (std::exp(x / b) - tail) / (2.0 * Mass());
    return 1.0 - (std::exp(-x / b) - tail) / (2.0 * Mass());
  }
  // Composite Simpson on [0, gbar], doubled by symmetry.
  double Variance() const {
    const int steps = 200000;
    const double h = gbar / steps;
    double total = 0.0;
    for (int k = 0; k <= steps; ++k) {
      const double x = k * h;
      const double w = (k == 0 || k == steps) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      total += w * x * x * Pdf(x);
    }
    return 2.0 * total * h / 3.0;
  }
};

CriterionResult VectorizationBijection() {
  const auto start = Clock::now();
  Rng rng(11);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  int checked = 0;
  for (int m = 1; m <= 6; ++m) {
    for (int rep = 0; rep < 200; ++rep) {
      Matrix a(m, m);
      for (int p = 0; p < m; ++p) {
        for (int q = p; q < m; ++q) a(p, q) = a(q, p) = u(rng);
      }
      auto packed = Vectorize(a);
      if (!packed.ok()) return Fail("vectorization_bijection", "vectorize failed");
      auto back = Devectorize(*packed);
      if (!back.ok() || *back != a) {
        return Fail("vectorization_bijection",
                    absl::StrCat("matrix round trip mismatch at m=", m));
      }
      Vector v(PackedSize(m));
      for (int k = 0; k < v.size(); ++k) v[k] = u(rng);
      auto again = Vectorize(*Devectorize(v));
      if (!again.ok() || *again != v) {
        return Fail("vectorization_bijection",
                    absl::StrCat("vector round trip mismatch at m=", m));
      }
      ++checked;
    }
  }
  const double seconds = Since(start);
  return {"vectorization_bijection", seconds < 1.0,
          absl::StrFormat("%d exact round trips, m=1..6, %.3fs (limit 1s)",
                          checked, seconds),
          seconds};
}

CriterionResult KappaCalibration() {
  const double epsilons[] = {0.1, 0.5, 1.0, 5.0, 10.0};
  const double deltas[] = {1e-5, 1e-3, 1e-2, 0.1, 0.3};
  double worst_kappa = 0.0;
  double worst_dp = 0.0;
  for (double eps : epsilons) {
    for (double delta : deltas) {
      auto kappa_bar = KappaInverse(eps, delta);
      if (!kappa_bar.ok()) {
        return Fail("kappa_calibration", std::string(kappa_bar.status().message()));
      }
      auto kappa = Kappa(eps, *kappa_bar);
      if (!kappa.ok()) {
        return Fail("kappa_calibration", std::string(kappa.status().message()));
      }
      worst_kappa = std::max(worst_kappa, std::abs(*kappa - delta));
      const double mu = 3.0;
      auto budget = PrivacyBudget::Create(eps, delta, mu);
      auto hat = DpVerifyNumeric(GaussianMechanism{mu / *kappa_bar}, *budget);
      if (!hat.ok()) {
        return Fail("kappa_calibration", std::string(hat.status().message()));
      }
      worst_dp = std::max(worst_dp, std::abs(*hat - delta));
    }
  }
  const bool ok = worst_kappa <= 1e-10 && worst_dp <= 1e-6;
  return {"kappa_calibration", ok,
          absl::StrFormat("5x5 grid: max|kappa(kappa_inv)-delta|=%.3g (tol "
                          "1e-10), max|delta_hat-delta|=%.3g (tol 1e-6)",
                          worst_kappa, worst_dp),
          0.0};
}

CriterionResult TruncatedLaplace() {
  const auto start = Clock::now();
  struct Setting {
    double mu, eps, gbar;
  };
  const Setting settings[] = {{3.0, 10.0, 3.1}, {1.0, 1.0, 5.0}};
  std::string detail;
  bool ok = true;
  Rng rng(12);
  const int samples = 1000000;
  for (const Setting& s : settings) {
    TruncatedLaplaceOracle oracle{s.mu / s.eps, s.gbar};
    std::vector<double> draws(samples);
    int violations = 0;
    double sum_sq = 0.0;
    for (double& x : draws) {
      auto g = SampleTruncatedLaplace(s.mu, s.eps, s.gbar, rng);
      if (!g.ok()) return Fail("truncated_laplace", "sampler error");
      x = *g;
      if (std::abs(x) > s.gbar) ++violations;
      sum_sq += x * x;
    }
    const double empirical = sum_sq / samples;
    auto closed = TruncatedLaplaceVariance(s.mu, s.eps, s.gbar);
    const double numeric = oracle.Variance();
    std::sort(draws.begin(), draws.end());
    double ks = 0.0;
    for (int k = 0; k < samples; ++k) {
      const double f = oracle.Cdf(draws[k]);
      ks = std::max({ks, static_cast<double>(k + 1) / samples - f,
                     f - static_cast<double>(k) / samples});
    }
    const double rel = std::abs(empirical - *closed) / *closed;
    const double formula_gap = std::abs(*closed - numeric) / numeric;
    ok = ok && violations == 0 && rel <= 0.02 && ks <= 0.002 &&
         formula_gap <= 1e-6;
    absl::StrAppendFormat(&detail,
                          "[mu=%g eps=%g gbar=%g: %d outside support, "
                          "var rel err %.4f, KS %.5f, formula vs quadrature "
                          "%.2g] ",
                          s.mu, s.eps, s.gbar, violations, rel, ks,
                          formula_gap);
  }
  // A configuration inside the feasible region.
  const double mu = 1.0, eps = 1.0, gbar = 5.0, delta = 0.01;
  const double c = mu / gbar;
  const double lower = std::expm1(eps) / (2.0 * std::expm1(eps / c));
  auto budget = PrivacyBudget::Create(eps, delta, mu);
  auto hat = DpVerifyNumeric(TruncatedLaplaceMechanism{mu, eps, gbar}, *budget);
  const bool feasible = c < 1.0 && delta >= lower && delta < 0.5;
  ok = ok && feasible && hat.ok() && *hat <= delta;
  const double seconds = Since(start);
  ok = ok && seconds < 30.0;
  absl::StrAppendFormat(&detail,
                        "feasible config delta_hat=%.5g <= delta=%g; %.1fs "
                        "(limit 30s)",
                        hat.ok() ? *hat : NAN, delta, seconds);
  return {"truncated_laplace", ok, detail, seconds};
}

CriterionResult PaillierHomomorphism() {
  const auto start = Clock::now();
  paillier::BigRandom rng(uint64_t{13});
  auto small = paillier::KeyGen(256, rng);
  if (!small.ok()) return Fail("paillier_homomorphism", "keygen failed");
  int exhaustive = 0;
  for (int a = 0; a <= 50; ++a) {
    auto ea = paillier::Encrypt(small->pk, mpz_class(a), rng);
    for (int b = 0; b <= 50; ++b) {
      auto eb = paillier::Encrypt(small->pk, mpz_class(b), rng);
      auto sum = paillier::HomAdd(small->pk, *ea, *eb);
      auto dsum = paillier::Decrypt(*small, *sum);
      if (!dsum.ok() || *dsum != a + b) {
        return Fail("paillier_homomorphism",
                    absl::StrCat("add mismatch at ", a, ",", b));
      }
      if (b >= 1) {
        auto scaled = paillier::HomScale(small->pk, *ea, mpz_class(b));
        auto dscaled = paillier::Decrypt(*small, *scaled);
        if (!dscaled.ok() || *dscaled != a * b) {
          return Fail("paillier_homomorphism",
                      absl::StrCat("scale mismatch at ", a, ",", b));
        }
      }
      ++exhaustive;
    }
  }
  auto full = paillier::KeyGen(paillier::kDefaultKeyBits, rng);
  if (!full.ok()) return Fail("paillier_homomorphism", "full keygen failed");
  int trips = 0;
  for (int k = 0; k < 1000; ++k) {
    const mpz_class m = rng.Below(full->pk.n);
    auto c = paillier::Encrypt(full->pk, m, rng);
    auto d = paillier::Decrypt(*full, *c);
    if (!d.ok() || *d != m) {
      return Fail("paillier_homomorphism",
                  absl::StrCat("round trip mismatch at ", k));
    }
    ++trips;
  }
  const double seconds = Since(start);
  return {"paillier_homomorphism", seconds < 60.0,
          absl::StrFormat("%d exhaustive pairs (256-bit), %d round trips "
                          "(%d-bit), all exact; %.1fs (limit 60s)",
                          exhaustive, trips, paillier::kDefaultKeyBits,
                          seconds),
          seconds};
}

CriterionResult DiShufZeroSum() {
  const auto start = Clock::now();
  int runs = 0;
  long double worst_sum = 0.0L;
  long double worst_bound_ratio = 0.0L;
  long double worst_oracle = 0.0L;
  int scale_bits = 0;
  bool ok = true;
  std::string why;
  auto run_one = [&](int n, double sigma_eta_sq, uint64_t seed,
                     bool compare_decoded) {
    Rng rng(seed);
    GlobalProblem problem = RandomProblem(n, 3, rng, NormalizedInstance());
    std::vector<Eigen::VectorXd> thetas;
    for (const QuadraticCost& cost : problem.costs()) {
      thetas.push_back(PackTheta(cost).values());
    }
    auto net = BuildCycle(n, 0.3);
    DiShufOptions options;
    options.a_bar = 100;
    const uint64_t protocol_seed = rng();
    Rng encrypted_rng(protocol_seed);
    auto run = RunDiShuf(*net, thetas, sigma_eta_sq, encrypted_rng, options);
    options.backend = DiShufBackend::kPlaintext;
    Rng plain_rng(protocol_seed);
    auto plain = RunDiShuf(*net, thetas, sigma_eta_sq, plain_rng, options);
    if (!run.ok() || !plain.ok()) {
      ok = false;
      why = std::string(run.ok() ? plain.status().message()
                                 : run.status().message());
      return;
    }
    ++runs;
    scale_bits = run->scale_bits;
    if (run->delta_fixed != plain->delta_fixed) {
      ok = false;
      why = "encrypted and plaintext backends disagree";
    }
    const int dim = static_cast<int>(thetas[0].size());
    for (int k = 0; k < dim; ++k) {
      mpz_class total = 0;
      for (int i = 0; i < n; ++i) total += run->delta_fixed[i][k];
      if (total != 0) {
        ok = false;
        why = "integer sum of Delta is not zero";
      }
    }
    if (!compare_decoded) return;
    const long double inv_scale = std::ldexp(1.0L, -run->scale_bits);
    std::vector<WideVector> theta_bars;
    for (int i = 0; i < n; ++i) {
      WideVector v(dim);
      for (int k = 0; k < dim; ++k) {
        v[k] = paillier::ToLongDouble(run->theta_bar_fixed[i][k],
                                      run->scale_bits);
      }
      theta_bars.push_back(v);
    }
    const auto oracle = PlaintextDiShufOracle(*net, theta_bars, run->scalars);
    for (int k = 0; k < dim; ++k) {
      long double total = 0.0L;
      for (int i = 0; i < n; ++i) {
        total += run->delta[i][k];
        worst_oracle =
            std::max(worst_oracle, std::abs(run->delta[i][k] - oracle[i][k]));
      }
      worst_sum = std::max(worst_sum, std::abs(total));
      worst_bound_ratio =
          std::max(worst_bound_ratio, std::abs(total) / (n * 2 * inv_scale));
    }
  };
  for (int r = 0; r < 100; ++r) {
    run_one(r < 50 ? 3 : 10, 1.0, DeriveSeed(14, r), true);
  }
  // Calibrated shuffle noise: the decoded values exceed long double
  // resolution, so only the exact integer identities are checked.
  auto budget = PrivacyBudget::Create(10.0, 0.2, 3.0);
  for (int n : {3, 10}) {
    auto calib = CalibrateDiShuf(*budget, n, 100, 0.01);
    if (!calib.ok()) return Fail("dishuf_zero_sum", "calibration failed");
    run_one(n, calib->sigma_eta_sq, DeriveSeed(15, n), false);
  }
  const long double one_over_s = std::ldexp(1.0L, -scale_bits);
  ok = ok && worst_bound_ratio <= 1.0L && worst_oracle <= one_over_s;
  const double seconds = Since(start);
  return {"dishuf_zero_sum", ok,
          absl::StrFormat(
              "%d runs (n in {3,10}, m=3, abar=100, 1024-bit keys): integer "
              "sums exactly 0; max decoded |sum|=%.3Lg (<= n*2/S); max "
              "|encrypted-oracle|=%.3Lg (1/S=%.3Lg); backends bit-identical%s",
              runs, worst_sum, worst_oracle, one_over_s,
              why.empty() ? "" : absl::StrCat("; ", why)),
          seconds};
}

CriterionResult NoiseOffEquivalence() {
  const auto start = Clock::now();
  double worst[3] = {0.0, 0.0, 0.0};
  auto budget = PrivacyBudget::Create(10.0, 0.2, 3.0);
  for (int r = 0; r < 20; ++r) {
    Rng rng(DeriveSeed(16, r));
    GlobalProblem problem = RandomProblem(10, 3, rng, NormalizedInstance());
    auto net = BuildCycle(10, 0.3);
    const Vector x_star = ExactSolution(problem);

    GtCalibrationOptions gt_options;
    gt_options.gamma_bar_override = 3.1;
    gt_options.validate = false;
    auto gt_calib = CalibrateGt(*budget, problem, gt_options);
    GtOptions gt;
    gt.noise_off = true;
    gt.rounds = 20000;
    gt.early_stop_tolerance = 1e-14;
    auto a = DpGtSolve(problem, *net, *budget, *gt_calib, gt, rng);

    auto calib = CalibrateDiShuf(*budget, 10, 100, 0.01);
    AcOptions ac;
    ac.noise_off = true;
    ac.rounds = 0;
    ac.consensus_tolerance = 1e-13;
    ac.dishuf.backend = DiShufBackend::kPlaintext;
    auto b = DpDiShufAcSolve(problem, *net, *calib, ac, rng);
    auto c = DpAcBaselineSolve(problem, *net, 1.0, ac, rng);
    if (!a.ok() || !b.ok() || !c.ok()) {
      return Fail("noise_off_oracle_equivalence", "solver error");
    }
    worst[0] = std::max(worst[0], (a->x_hat - x_star).norm());
    worst[1] = std::max(worst[1], (b->x_hat - x_star).norm());
    worst[2] = std::max(worst[2], (c->x_hat - x_star).norm());
  }
  const bool ok = std::max({worst[0], worst[1], worst[2]}) <= 1e-8;
  return {"noise_off_oracle_equivalence", ok,
          absl::StrFormat("20 instances n=10 m=3: max ||x_hat-x*|| gt=%.3g "
                          "dishuf-ac=%.3g ac-baseline=%.3g (tol 1e-8)",
                          worst[0], worst[1], worst[2]),
          Since(start)};
}

CriterionResult GtConvergence() {
  const auto start = Clock::now();
  ExperimentConfig config = CaseStudyConfig(17);
  config.trials = 20;
  auto trajectory = MeanTrajectory(config);
  if (!trajectory.ok()) {
    return Fail("gt_convergence", std::string(trajectory.status().message()));
  }
  const double per_trial = Since(start) / config.trials;
  // Same seeds, zero rounds: the perturbed optimum of every trial.
  config.gt_rounds = 0;
  auto limits = MonteCarlo(config);
  if (!limits.ok()) return Fail("gt_convergence", "limit run failed");
  double floor = 0.0;
  for (const TrialRow& row : limits->rows) floor += row.limit_error_sq;
  floor /= config.trials;

  const auto& t = *trajectory;
  const double e0 = t.front().mean_sq_to_limit;
  double e_min = e0;
  for (const TrajectoryPoint& p : t) e_min = std::min(e_min, p.mean_sq_to_limit);
  const double drop = e0 / e_min;

  // Log-linear fit over the stretch between 1e-1 and 1e-7 of the start.
  std::vector<double> xs, ys;
  for (const TrajectoryPoint& p : t) {
    if (p.mean_sq_to_limit <= 1e-1 * e0 && p.mean_sq_to_limit >= 1e-7 * e0) {
      xs.push_back(p.round);
      ys.push_back(std::log(p.mean_sq_to_limit));
    }
  }
  double slope = NAN, r2 = NAN;
  if (xs.size() >= 3) {
    const double k = xs.size();
    double mx = 0, my = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i] / k;
      my += ys[i] / k;
    }
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
      syy += (ys[i] - my) * (ys[i] - my);
    }
    slope = sxy / sxx;
    r2 = sxy * sxy / (sxx * syy);
  }
  const double final_error = t.back().mean_sq_error;
  const double floor_gap = std::abs(final_error - floor) / floor;
  const size_t tail_start = t.size() * 4 / 5;
  double tail_lo = final_error, tail_hi = final_error;
  for (size_t k = tail_start; k < t.size(); ++k) {
    tail_lo = std::min(tail_lo, t[k].mean_sq_error);
    tail_hi = std::max(tail_hi, t[k].mean_sq_error);
  }
  const double tail_spread = (tail_hi - tail_lo) / final_error;
  const bool ok = drop >= 1e6 && slope < 0 && r2 >= 0.95 &&
                  floor_gap <= 1e-6 && tail_spread <= 1e-6 && per_trial < 10;
  return {"gt_convergence", ok,
          absl::StrFormat(
              "20 trials x %d rounds: distance to perturbed optimum fell "
              "%.2g-fold (need 1e6); log-slope %.4g/round, R^2=%.4f (need "
              ">=0.95); final error %.6g vs noise floor %.6g (rel %.2g); "
              "tail spread %.2g; %.3fs/trial",
              static_cast<int>(t.size()) - 1, drop, slope, r2, final_error,
              floor, floor_gap, tail_spread, per_trial),
          Since(start)};
}

CriterionResult GtErrorBound() {
  const auto start = Clock::now();
  ExperimentConfig config = CaseStudyConfig(18);
  config.trials = 200;
  config.gt_rounds = 0;
  auto experiment = Experiment::Create(config);
  if (!experiment.ok()) {
    return Fail("gt_error_bound", std::string(experiment.status().message()));
  }
  auto result = MonteCarlo(*experiment);
  double mean = 0.0;
  int indefinite = 0;
  for (const TrialRow& row : result->rows) {
    mean += row.limit_error_sq / config.trials;
    if (!row.hessian_positive_definite) ++indefinite;
  }
  const GtNoiseCalibration& calib = *experiment->gt_calibration();
  const double bound =
      GtMeanSquareErrorBound(experiment->problem(), calib);

  // Noise sums alone.
  const int noise_trials = 10000;
  const GlobalProblem& problem = experiment->problem();
  const int n = problem.num_agents();
  const int m = problem.dim();
  double omega_a = 0.0, omega_b = 0.0;
  GtOptions options;
  options.rounds = 0;
  for (int t = 0; t < noise_trials; ++t) {
    Rng rng(DeriveSeed(19, t));
    auto out = DpGtSolve(problem, experiment->network(), experiment->budget(),
                         calib, options, rng);
    if (!out.ok()) return Fail("gt_error_bound", "noise-only trial failed");
    omega_a += out->omega_a_frobenius * out->omega_a_frobenius / noise_trials;
    omega_b += (out->b_hat - problem.b_sum()).squaredNorm() / noise_trials;
  }
  const double expect_a = n * m * m * calib.sigma_gamma_sq;
  const double expect_b = n * m * calib.sigma_eta * calib.sigma_eta;
  const double rel_a = std::abs(omega_a - expect_a) / expect_a;
  const double rel_b = std::abs(omega_b - expect_b) / expect_b;
  const double seconds = Since(start);
  const bool ok = mean <= bound && rel_a <= 0.05 && rel_b <= 0.05 &&
                  seconds < 300.0;
  return {"gt_error_bound", ok,
          absl::StrFormat(
              "200 trials: mean ||x(inf)-x*||^2=%.4g <= bound %.4g "
              "(%d indefinite G); 1e4 noise-only trials: E||Omega_A||_F^2 "
              "rel err %.4f, E||Omega_B||^2 rel err %.4f (tol 0.05); %.1fs",
              mean, bound, indefinite, rel_a, rel_b, seconds),
          seconds};
}

CriterionResult DiShufAcAccuracy() {
  const auto start = Clock::now();
  ExperimentConfig config = CaseStudyConfig(20);
  config.solver = SolverKind::kDiShufAc;
  config.trials = 1000;
  auto experiment = Experiment::Create(config);
  if (!experiment.ok()) {
    return Fail("dishuf_ac_accuracy",
                std::string(experiment.status().message()));
  }
  auto result = MonteCarlo(*experiment);
  double mean = 0.0;
  int failed = 0;
  for (const TrialRow& row : result->rows) {
    if (row.failed) {
      ++failed;
      continue;
    }
    mean += row.theta_error_sq;
  }
  mean /= std::max(1, config.trials - failed);
  const DiShufCalibration& calib = *experiment->dishuf_calibration();
  const int dim = ThetaSize(config.m);
  const double sigma_sq = calib.sigma_gamma * calib.sigma_gamma;
  const double expected = dim * config.n * sigma_sq;
  // The stated per-coordinate value carries no dimension factor.
  const double stated = config.n * sigma_sq;
  const double rel = std::abs(mean - expected) / expected;
  const double seconds = Since(start);
  const bool ok = failed == 0 && rel <= 0.10 && seconds < 300.0;
  return {"dishuf_ac_accuracy", ok,
          absl::StrFormat(
              "1000 trials: E||theta_hat-sum theta||^2=%.5g vs dim*n*"
              "sigma_gamma^2=%.5g (rel %.4f, tol 0.10); dimension-free "
              "value %.5g differs by factor %.2f; %d failed; %.1fs",
              mean, expected, rel, stated, mean / stated, failed, seconds),
          seconds};
}

CriterionResult NetworkSizeOrdering() {
  const auto start = Clock::now();
  ExperimentConfig config = CaseStudyConfig(21);
  config.trials = 100;
  config.gt_rounds = 20000;
  auto sweep = SweepNetworkSize(config, {10, 50});
  if (!sweep.ok()) {
    return Fail("network_size_ordering", std::string(sweep.status().message()));
  }
  std::map<std::pair<SolverKind, int>, std::vector<double>> groups;
  int failed = 0;
  for (const TrialRow& row : sweep->rows) {
    if (row.failed) {
      ++failed;
      continue;
    }
    groups[{row.solver, row.n}].push_back(row.mean_agent_error_sq);
  }
  auto median = [&](SolverKind kind, int n) {
    return Quantile(groups[{kind, n}], 0.5);
  };
  const double gt10 = median(SolverKind::kGt, 10);
  const double gt50 = median(SolverKind::kGt, 50);
  const double ds10 = median(SolverKind::kDiShufAc, 10);
  const double ds50 = median(SolverKind::kDiShufAc, 50);
  const double ac10 = median(SolverKind::kAcBaseline, 10);
  const double ac50 = median(SolverKind::kAcBaseline, 50);
  const bool ok = failed == 0 && gt50 > gt10 && ds50 <= 3 * ds10 &&
                  ds50 >= ds10 / 3 && ds10 <= ac10 && ds50 <= ac50;
  return {"network_size_ordering", ok,
          absl::StrFormat(
              "medians n=10/50: gt %.4g/%.4g, dishuf-ac %.4g/%.4g (ratio "
              "%.2f), ac-baseline %.4g/%.4g; %d failed; %.1fs",
              gt10, gt50, ds10, ds50, ds50 / ds10, ac10, ac50, failed,
              Since(start)),
          Since(start)};
}

CriterionResult Determinism() {
  const auto start = Clock::now();
  bool ok = true;
  std::string detail;
  for (SolverKind kind :
       {SolverKind::kGt, SolverKind::kDiShufAc, SolverKind::kAcBaseline}) {
    ExperimentConfig config = CaseStudyConfig(7);
    config.solver = kind;
    config.trials = 3;
    config.backend = DiShufBackend::kPaillier;
    config.key_bits = 512;
    std::string csv[2];
    for (int rep = 0; rep < 2; ++rep) {
      config.jobs = rep + 1;
      auto result = MonteCarlo(config);
      if (!result.ok()) {
        return Fail("determinism", std::string(result.status().message()));
      }
      std::ostringstream out;
      WriteTrialsHeader(out);
      WriteTrialRows(out, result->rows);
      csv[rep] = out.str();
    }
    const bool same = csv[0] == csv[1];
    ok = ok && same;
    absl::StrAppend(&detail, SolverName(kind), same ? " identical" : " DIFFERS",
                    " (", csv[0].size(), " bytes); ");
  }
  return {"determinism", ok,
          absl::StrCat(detail, "jobs=1 vs jobs=2, seed 7"), Since(start)};
}

}  // namespace

std::vector<Criterion> AcceptanceCriteria() {
  return {
      {"vectorization_bijection", VectorizationBijection},
      {"kappa_calibration", KappaCalibration},
      {"truncated_laplace", TruncatedLaplace},
      {"paillier_homomorphism", PaillierHomomorphism},
      {"dishuf_zero_sum", DiShufZeroSum},
      {"noise_off_oracle_equivalence", NoiseOffEquivalence},
      {"gt_convergence", GtConvergence},
      {"gt_error_bound", GtErrorBound},
      {"dishuf_ac_accuracy", DiShufAcAccuracy},
      {"network_size_ordering", NetworkSizeOrdering},
      {"determinism", Determinism},
  };
}

std::string FormatResult(const CriterionResult& result) {
  return absl::StrFormat("%s %s (%.1fs): %s", result.passed ? "PASS" : "FAIL",
                         result.name, result.seconds, result.detail);
}

std::vector<CriterionResult> RunAcceptance(std::ostream& out,
                                           const std::string& filter) {
  std::vector<CriterionResult> results;
  for (const Criterion& criterion : AcceptanceCriteria()) {
    if (!filter.empty() && criterion.name.find(filter) == std::string::npos) {
      continue;
    }
    const auto start = Clock::now();
    CriterionResult result = criterion.run();
    result.name = criterion.name;
    result.seconds = Since(start);
    out << FormatResult(result) << std::endl;
    results.push_back(std::move(result));
  }
  return results;
}

}  // namespace dpls
