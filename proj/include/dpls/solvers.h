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

// The end-to-end solvers: noise-perturbed gradient tracking, shuffled
// average consensus followed by a local solve, and the plain Gaussian
// average-consensus baseline. Also the consensus primitives they share.

#ifndef DPLS_SOLVERS_H_
#define DPLS_SOLVERS_H_

#include <functional>
#include <optional>
#include <vector>

#include <gmpxx.h>

#include "absl/status/statusor.h"
#include "dpls/dishuf.h"
#include "dpls/graph.h"
#include "dpls/mechanisms.h"
#include "dpls/problem.h"
#include "dpls/random.h"

namespace dpls {

struct TrajectoryPoint {
  int round;
  // (1/n) sum_i ||x_i(t) - x*||^2.
  double mean_sq_error;
  // (1/n) sum_i ||x_i(t) - x(inf)||^2 with x(inf) the perturbed optimum.
  double mean_sq_to_limit;
};

struct SolveOutcome {
  // Average of the agents' final estimates.
  Vector x_hat;
  std::vector<Vector> agent_solutions;
  // Perturbed global data the agents effectively solved with.
  Matrix a_hat;
  Vector b_hat;
  int iterations = 0;
  bool early_stopped = false;
  std::vector<TrajectoryPoint> trajectory;

  // Gradient tracking only.
  std::optional<Vector> limit;
  bool hessian_positive_definite = true;
  double omega_a_frobenius = 0.0;
  double max_tracking_violation = 0.0;

  // Consensus solvers only.
  Vector theta_hat;
  double consensus_disagreement = 0.0;
  int attempts = 0;
};

struct GtOptions {
  double beta = 0.005;
  int rounds = 2000;
  // Stop once max_i ||x_i(t+1) - x_i(t)|| falls below this; 0 disables.
  double early_stop_tolerance = 1e-12;
  bool noise_off = false;
  bool record_trajectory = false;
  // Measure |sum_i s_i - sum_i (G_i x_i + H_i)| every round.
  bool check_tracking = false;
};

// Each agent perturbs theta_i^A with truncated Laplace noise and B_i with
// Gaussian noise once, then runs
//   x_i <- x_i + sum_j w_ij (x_j - x_i) - beta s_i
//   s_i <- s_i + sum_j w_ij (s_j - s_i) + G_i (x_i^new - x_i)
// from x_i = 0, s_i = H_i. Fails if the iterates blow up by 10^6.
absl::StatusOr<SolveOutcome> DpGtSolve(const GlobalProblem& problem,
                                       const Network& net,
                                       const PrivacyBudget& budget,
                                       const GtNoiseCalibration& calib,
                                       const GtOptions& options, Rng& rng);

// Synchronous y_i <- y_i + sum_j w_ij (y_j - y_i) for `rounds` rounds.
std::vector<Vector> AverageConsensus(const Network& net,
                                     std::vector<Vector> y, int rounds);

// The same iteration on integers scaled by 2^fractional_bits. Each edge
// moves one rounded flux from one endpoint to the other, so sum_i y_i is
// conserved exactly however large the states are.
class FixedPointConsensus {
 public:
  FixedPointConsensus(const Network& net, int fractional_bits);

  void Load(std::vector<std::vector<mpz_class>> state);
  void Step();
  // max over coordinates of (max_i y_i - min_i y_i), in real units.
  double Disagreement() const;
  // Same test as Disagreement() <= limit * 2^-fractional_bits, without leaving
  // the integers.
  bool SpreadAtMost(const mpz_class& limit) const;
  Vector Value(int agent) const;
  // sum_i y_i per coordinate, as scaled integers.
  std::vector<mpz_class> Sum() const;
  const std::vector<std::vector<mpz_class>>& state() const { return state_; }
  int fractional_bits() const { return fractional_bits_; }

 private:
  struct ScaledEdge {
    int i;
    int j;
    long mantissa;
    int shift;  // w_ij = mantissa * 2^-shift
    mpz_class half;
  };

  int fractional_bits_;
  std::vector<ScaledEdge> edges_;
  std::vector<std::vector<mpz_class>> state_;
  std::vector<mpz_class> flux_;
};

struct AcOptions {
  // Upper bound on consensus rounds; the run stops early once agents agree.
  int rounds = 500;
  // Agreement target: max_ij ||y_i - y_j||_inf <= tol * max(1, ||ybar||_inf).
  double consensus_tolerance = 1e-9;
  bool noise_off = false;
  int fractional_bits = 64;
  DiShufOptions dishuf;
  // One re-run on a singular A_hat, then an error.
  int max_attempts = 2;
  // Test seam: edits every agent's n * y_i(T) before the local solve.
  std::function<void(int attempt, std::vector<Vector>& theta_hats)>
      theta_hat_hook;
};

// DiShuf, then y_i(0) = theta_i + zeta Delta_i + gamma_i with
// gamma_i ~ N(0, sigma_gamma^2), consensus, and A_hat x = -B_hat at every
// agent from theta_hat = n y_i(T).
absl::StatusOr<SolveOutcome> DpDiShufAcSolve(const GlobalProblem& problem,
                                             const Network& net,
                                             const DiShufCalibration& calib,
                                             const AcOptions& options,
                                             Rng& rng);

// Same pipeline with y_i(0) = theta_i + gamma_i, gamma_i ~ N(0, sigma^2).
absl::StatusOr<SolveOutcome> DpAcBaselineSolve(const GlobalProblem& problem,
                                               const Network& net,
                                               double sigma,
                                               const AcOptions& options,
                                               Rng& rng);

// (2 n m^2 sigma_gamma^2 ||x*||^2 + 2 n m sigma_eta^2) / ((1-d)^2 lambda^2).
// Upper bound on E||x(inf) - x*||^2 for the gradient-tracking solver.
double GtMeanSquareErrorBound(const GlobalProblem& problem,
                              const GtNoiseCalibration& calib);

// Rounds after which average consensus contracts an initial spread by
// `reduction`, from the spectral rate.
absl::StatusOr<int> ConsensusRoundsFor(const Network& net, double reduction);

}  // namespace dpls

#endif  // DPLS_SOLVERS_H_
