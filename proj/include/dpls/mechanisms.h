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

// Differential-privacy primitives: the Gaussian trade-off function kappa and
// its inverse, the truncated Laplace mechanism, the noise calibrations of the
// two solvers, and a numerical (epsilon, delta) checker for scalar
// mechanisms.

#ifndef DPLS_MECHANISMS_H_
#define DPLS_MECHANISMS_H_

#include <optional>
#include <variant>

#include "absl/status/statusor.h"
#include "dpls/problem.h"
#include "dpls/random.h"

namespace dpls {

class PrivacyBudget {
 public:
  // epsilon > 0, 0 < delta < 1, mu > 0.
  static absl::StatusOr<PrivacyBudget> Create(double epsilon, double delta,
                                              double mu);

  double epsilon() const { return epsilon_; }
  double delta() const { return delta_; }
  // Adjacency bound: neighbouring thetas differ in one entry by at most mu.
  double mu() const { return mu_; }

 private:
  PrivacyBudget(double epsilon, double delta, double mu)
      : epsilon_(epsilon), delta_(delta), mu_(mu) {}

  double epsilon_;
  double delta_;
  double mu_;
};

// Phi(s), the standard normal CDF.
double StdNormalCdf(double s);

// kappa_eps(s) = Phi(s/2 - eps/s) - e^eps Phi(-s/2 - eps/s). This is the
// exact delta of the Gaussian mechanism whose sensitivity-to-sigma ratio is s.
absl::StatusOr<double> Kappa(double epsilon, double s);

// Inverse of kappa_eps on s > 0: bracket doubling from s = 1, then bisection
// until |kappa(s) - delta| <= 1e-12 or the bracket collapses.
absl::StatusOr<double> KappaInverse(double epsilon, double delta);

// One draw from the density
//   p(g) = eps / (2 mu (1 - e^{-eps gbar/mu})) e^{-eps |g| / mu},  |g| <= gbar
// by inverting its CDF at a single uniform.
absl::StatusOr<double> SampleTruncatedLaplace(double mu, double epsilon,
                                              double gamma_bar, Rng& rng);

// Closed-form variance of the density above.
absl::StatusOr<double> TruncatedLaplaceVariance(double mu, double epsilon,
                                                double gamma_bar);

double SampleGaussian(double stddev, Rng& rng);

struct GtCalibrationOptions {
  // gamma_bar = d * lambda_min(A) / (sqrt(n) m).
  double d = 0.5;
  // Use this truncation level instead; d is then back-computed.
  std::optional<double> gamma_bar_override;
  // When false, infeasible budgets are reported in the result instead of
  // returned as errors.
  bool validate = true;
};

struct GtNoiseCalibration {
  double gamma_bar = 0.0;
  double c = 0.0;  // mu / gamma_bar
  double d = 0.0;
  double sigma_eta = 0.0;
  double sigma_gamma_sq = 0.0;
  // (e^eps - 1) / (2 (e^{eps/c} - 1)): smallest delta the truncated Laplace
  // mechanism can certify at this c.
  double delta_lower_bound = 0.0;
  // Whether 1/2 > delta >= delta_lower_bound and 0 < c < 1.
  bool feasible = false;
};

absl::StatusOr<GtNoiseCalibration> CalibrateGt(
    const PrivacyBudget& budget, const GlobalProblem& problem,
    const GtCalibrationOptions& options = {});

// alpha = (1 - (2(n + abar^-2))^{-(n-1)})^{1/(n-1)}. 1 - alpha underflows
// double already for moderate n, so it is also carried as a logarithm.
struct ShuffleContraction {
  double alpha = 0.0;
  double log_one_minus_alpha = 0.0;
};
absl::StatusOr<ShuffleContraction> ComputeShuffleContraction(int n,
                                                             double a_bar);

struct DiShufCalibration {
  int n = 0;
  double a_bar = 0.0;
  double g = 0.0;
  double kappa_bar = 0.0;
  // Std of the Gaussian gamma_i added to the consensus initial state.
  double sigma_gamma = 0.0;
  // Variance of the Gaussian eta_i used inside the shuffling mechanism.
  double sigma_eta_sq = 0.0;
  double log_sigma_eta_sq = 0.0;
  ShuffleContraction contraction;
  double zeta = 0.0;  // 1 / (n abar^2 + 1)
};

// Requires n >= 3, abar >= 10, g > 0. Fails with OutOfRange when the shuffle
// noise variance exceeds the double range (large n).
absl::StatusOr<DiShufCalibration> CalibrateDiShuf(const PrivacyBudget& budget,
                                                  int n, double a_bar,
                                                  double g);

struct TruncatedLaplaceMechanism {
  double mu;
  double epsilon;
  double gamma_bar;
};
struct GaussianMechanism {
  double sigma;
};
using ScalarMechanism =
    std::variant<TruncatedLaplaceMechanism, GaussianMechanism>;

// Integrates max(p_0(z) - e^eps p_shift(z), 0) over z for shift = +mu and
// -mu and returns the larger value. For an (eps, delta)-DP mechanism this is
// at most delta.
absl::StatusOr<double> DpVerifyNumeric(const ScalarMechanism& mechanism,
                                       const PrivacyBudget& budget);

}  // namespace dpls

#endif  // DPLS_MECHANISMS_H_
