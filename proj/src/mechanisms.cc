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

#include "dpls/mechanisms.h"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "boost/math/quadrature/gauss_kronrod.hpp"
#include "dpls/status_macros.h"

namespace dpls {
namespace {

constexpr double kKappaTolerance = 1e-12;

// log Phi(x) without underflow for very negative x.
double LogStdNormalCdf(double x) {
  if (x > -30.0) return std::log(StdNormalCdf(x));
  // Mills-ratio asymptotic, three terms; relative error < 1e-9 for x < -30.
  const double x2 = x * x;
  return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * M_PI) +
         std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
}

double KappaUnchecked(double epsilon, double s) {
  const double head = StdNormalCdf(s / 2.0 - epsilon / s);
  const double tail =
      std::exp(epsilon + LogStdNormalCdf(-s / 2.0 - epsilon / s));
  return head - tail;
}

absl::Status CheckPositive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    return absl::InvalidArgumentError(
        absl::StrCat(name, " must be positive and finite, got ", value));
  }
  return absl::OkStatus();
}

// Laplace scale b = mu / eps and truncation ratio a = gbar / b.
double LaplaceVarianceFromRatio(double b, double a) {
  if (a < 0.1) {
    // 2 - e^{-a}(a^2 + 2a + 2) = 2 e^{-a} sum_{k>=3} a^k / k!; the direct form
    // cancels catastrophically here.
    double term = a * a * a / 6.0;
    double series = 0.0;
    for (int k = 3; k < 30 && term > 0.0; ++k) {
      series += term;
      term *= a / (k + 1);
    }
    return b * b * 2.0 * std::exp(-a) * series / (-std::expm1(-a));
  }
  const double tail = std::exp(-a);
  const double gbar = a * b;
  return (2.0 * b * b - tail * (gbar * gbar + 2.0 * b * gbar + 2.0 * b * b)) /
         (-std::expm1(-a));
}

double TruncatedLaplaceDensity(const TruncatedLaplaceMechanism& m,
                               double center, double z) {
  const double x = z - center;
  if (x < -m.gamma_bar || x > m.gamma_bar) return 0.0;
  const double b = m.mu / m.epsilon;
  return std::exp(-std::abs(x) / b) /
         (2.0 * b * -std::expm1(-m.gamma_bar / b));
}

double GaussianDensity(double sigma, double center, double z) {
  const double x = (z - center) / sigma;
  return std::exp(-0.5 * x * x) / (sigma * std::sqrt(2.0 * M_PI));
}

template <typename F>
double Integrate(F&& f, double a, double b) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, a, b, 20, 1e-14);
}

// The density uses the mechanism's own parameters; the privacy loss is
// measured at the budget's epsilon.
double HockeyStick(const TruncatedLaplaceMechanism& m, double epsilon,
                   double shift) {
  const double e_eps = std::exp(epsilon);
  const double b = m.mu / m.epsilon;
  // log p_0(z) - log p_shift(z) where both are positive; piecewise linear.
  auto log_ratio = [&](double z) { return (std::abs(z - shift) - std::abs(z)) / b; };
  std::vector<double> knots = {-m.gamma_bar,        m.gamma_bar, 0.0, shift,
                               shift - m.gamma_bar, shift + m.gamma_bar};
  std::sort(knots.begin(), knots.end());
  // The loss is linear between knots, so each crossing of epsilon is exact.
  std::vector<double> cuts = knots;
  for (size_t k = 0; k + 1 < knots.size(); ++k) {
    const double l0 = log_ratio(knots[k]) - epsilon;
    const double l1 = log_ratio(knots[k + 1]) - epsilon;
    if ((l0 < 0.0 && l1 > 0.0) || (l0 > 0.0 && l1 < 0.0)) {
      cuts.push_back(knots[k] + (knots[k + 1] - knots[k]) * l0 / (l0 - l1));
    }
  }
  std::sort(cuts.begin(), cuts.end());

  double total = 0.0;
  for (size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double lo = std::max(cuts[k], -m.gamma_bar);
    const double hi = std::min(cuts[k + 1], m.gamma_bar);
    if (!(hi > lo)) continue;
    const double mid = 0.5 * (lo + hi);
    if (TruncatedLaplaceDensity(m, shift, mid) == 0.0) {
      total += Integrate(
          [&](double z) { return TruncatedLaplaceDensity(m, 0.0, z); }, lo,
          hi);
    } else if (log_ratio(mid) > epsilon + 1e-12) {
      total += Integrate(
          [&](double z) {
            return TruncatedLaplaceDensity(m, 0.0, z) -
                   e_eps * TruncatedLaplaceDensity(m, shift, z);
          },
          lo, hi);
    }
  }
  return total;
}

double HockeyStick(const GaussianMechanism& m, double epsilon, double shift) {
  const double e_eps = std::exp(epsilon);
  auto integrand = [&](double z) {
    return std::max(GaussianDensity(m.sigma, 0.0, z) -
                        e_eps * GaussianDensity(m.sigma, shift, z),
                    0.0);
  };
  // p_0 >= e^eps p_shift exactly on one side of this point.
  const double crossing =
      (shift * shift - 2.0 * epsilon * m.sigma * m.sigma) / (2.0 * shift);
  const double reach = 40.0 * m.sigma + std::abs(shift);
  if (shift > 0.0) return Integrate(integrand, crossing - reach, crossing);
  return Integrate(integrand, crossing, crossing + reach);
}

}  // namespace

absl::StatusOr<PrivacyBudget> PrivacyBudget::Create(double epsilon,
                                                    double delta, double mu) {
  DPLS_RETURN_IF_ERROR(CheckPositive(epsilon, "epsilon"));
  DPLS_RETURN_IF_ERROR(CheckPositive(mu, "mu"));
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("delta must lie in (0,1), got ", delta));
  }
  return PrivacyBudget(epsilon, delta, mu);
}

double StdNormalCdf(double s) { return 0.5 * std::erfc(-s / std::sqrt(2.0)); }

absl::StatusOr<double> Kappa(double epsilon, double s) {
  DPLS_RETURN_IF_ERROR(CheckPositive(epsilon, "epsilon"));
  DPLS_RETURN_IF_ERROR(CheckPositive(s, "s"));
  return KappaUnchecked(epsilon, s);
}

absl::StatusOr<double> KappaInverse(double epsilon, double delta) {
  DPLS_RETURN_IF_ERROR(CheckPositive(epsilon, "epsilon"));
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("delta must lie in (0,1), got ", delta));
  }
  double lo = 1.0;
  double hi = 1.0;
  if (KappaUnchecked(epsilon, 1.0) < delta) {
    while (KappaUnchecked(epsilon, hi) < delta) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e12) {
        return absl::OutOfRangeError("kappa_inverse bracket diverged");
      }
    }
  } else {
    while (KappaUnchecked(epsilon, lo) >= delta) {
      hi = lo;
      lo /= 2.0;
      if (lo < 1e-300) {
        return absl::OutOfRangeError("kappa_inverse bracket collapsed at 0");
      }
    }
  }
  // kappa(lo) < delta <= kappa(hi).
  double mid = 0.5 * (lo + hi);
  for (int iter = 0; iter < 2000; ++iter) {
    mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double value = KappaUnchecked(epsilon, mid);
    if (std::abs(value - delta) <= kKappaTolerance * 1e-3) break;
    if (value < delta) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (std::abs(KappaUnchecked(epsilon, mid) - delta) > kKappaTolerance) {
    return absl::InternalError(absl::StrCat(
        "kappa_inverse failed to reach tolerance at eps=", epsilon,
        " delta=", delta));
  }
  return mid;
}

absl::StatusOr<double> SampleTruncatedLaplace(double mu, double epsilon,
                                              double gamma_bar, Rng& rng) {
  DPLS_RETURN_IF_ERROR(CheckPositive(mu, "mu"));
  DPLS_RETURN_IF_ERROR(CheckPositive(epsilon, "epsilon"));
  DPLS_RETURN_IF_ERROR(CheckPositive(gamma_bar, "gamma_bar"));
  const double b = mu / epsilon;
  const double mass = -std::expm1(-gamma_bar / b);
  // v uniform on [-1, 1); |gamma| has CDF (1 - e^{-t/b}) / mass on [0, gbar].
  const double v = 2.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng) - 1.0;
  const double magnitude =
      std::min(-b * std::log1p(-std::abs(v) * mass), gamma_bar);
  return v < 0.0 ? -magnitude : magnitude;
}

absl::StatusOr<double> TruncatedLaplaceVariance(double mu, double epsilon,
                                                double gamma_bar) {
  DPLS_RETURN_IF_ERROR(CheckPositive(mu, "mu"));
  DPLS_RETURN_IF_ERROR(CheckPositive(epsilon, "epsilon"));
  DPLS_RETURN_IF_ERROR(CheckPositive(gamma_bar, "gamma_bar"));
  const double b = mu / epsilon;
  return LaplaceVarianceFromRatio(b, gamma_bar / b);
}

double SampleGaussian(double stddev, Rng& rng) {
  if (stddev == 0.0) return 0.0;
  return std::normal_distribution<double>(0.0, stddev)(rng);
}

absl::StatusOr<GtNoiseCalibration> CalibrateGt(
    const PrivacyBudget& budget, const GlobalProblem& problem,
    const GtCalibrationOptions& options) {
  const int n = problem.num_agents();
  const int m = problem.dim();
  const double spread = std::sqrt(static_cast<double>(n)) * m;

  GtNoiseCalibration calib;
  if (options.gamma_bar_override) {
    calib.gamma_bar = *options.gamma_bar_override;
    DPLS_RETURN_IF_ERROR(CheckPositive(calib.gamma_bar, "gamma_bar"));
    calib.d = calib.gamma_bar * spread / problem.lambda_min();
  } else {
    if (!(options.d > 0.0 && options.d < 1.0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("d must lie in (0,1), got ", options.d));
    }
    calib.d = options.d;
    calib.gamma_bar = calib.d * problem.lambda_min() / spread;
  }
  const double eps = budget.epsilon();
  calib.c = budget.mu() / calib.gamma_bar;
  calib.delta_lower_bound =
      std::expm1(eps) / (2.0 * std::expm1(eps / calib.c));
  calib.feasible = calib.c < 1.0 && calib.d < 1.0 && budget.delta() < 0.5 &&
                   budget.delta() >= calib.delta_lower_bound;

  if (options.validate) {
    if (!(calib.d < 1.0)) {
      return absl::FailedPreconditionError(absl::StrCat(
          "truncation level gamma_bar=", calib.gamma_bar,
          " exceeds lambda_min(A)/(sqrt(n) m); d=", calib.d, " must be < 1"));
    }
    if (!(calib.c < 1.0)) {
      return absl::FailedPreconditionError(absl::StrCat(
          "adjacency too large: mu=", budget.mu(),
          " must be below gamma_bar=", calib.gamma_bar));
    }
    if (!(budget.delta() < 0.5)) {
      return absl::FailedPreconditionError(absl::StrCat(
          "calibration infeasible: 1/2 > delta violated (delta=",
          budget.delta(), ")"));
    }
    if (!(budget.delta() >= calib.delta_lower_bound)) {
      return absl::FailedPreconditionError(absl::StrCat(
          "calibration infeasible: delta >= (e^eps - 1)/(2(e^{eps/c} - 1)) "
          "violated (delta=",
          budget.delta(), ", bound=", calib.delta_lower_bound, ", c=", calib.c,
          ")"));
    }
  }

  DPLS_ASSIGN_OR_RETURN(const double kappa_bar,
                        KappaInverse(eps, budget.delta()));
  calib.sigma_eta = budget.mu() / kappa_bar;
  DPLS_ASSIGN_OR_RETURN(
      calib.sigma_gamma_sq,
      TruncatedLaplaceVariance(budget.mu(), eps, calib.gamma_bar));

  if (options.validate && !calib.feasible) {
    return absl::InternalError("post-hoc feasibility check failed");
  }
  return calib;
}

absl::StatusOr<ShuffleContraction> ComputeShuffleContraction(int n,
                                                             double a_bar) {
  if (n < 3) {
    return absl::InvalidArgumentError(absl::StrCat("n must be >= 3, got ", n));
  }
  DPLS_RETURN_IF_ERROR(CheckPositive(a_bar, "a_bar"));
  // x = (2(n + abar^-2))^{-(n-1)}, alpha = (1 - x)^{1/(n-1)}.
  const double log_x = -(n - 1) * std::log(2.0 * (n + 1.0 / (a_bar * a_bar)));
  ShuffleContraction out;
  if (log_x > -700.0) {
    const double log_alpha = std::log1p(-std::exp(log_x)) / (n - 1);
    out.alpha = std::exp(log_alpha);
    out.log_one_minus_alpha = std::log(-std::expm1(log_alpha));
  } else {
    // 1 - (1 - x)^{1/(n-1)} = x/(n-1) (1 + O(x)) and x < 1e-304 here.
    out.alpha = 1.0;
    out.log_one_minus_alpha = log_x - std::log(n - 1.0);
  }
  return out;
}

absl::StatusOr<DiShufCalibration> CalibrateDiShuf(const PrivacyBudget& budget,
                                                  int n, double a_bar,
                                                  double g) {
  if (n < 3) {
    return absl::InvalidArgumentError(absl::StrCat("n must be >= 3, got ", n));
  }
  if (!(a_bar >= 10.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("a_bar must be >= 10, got ", a_bar));
  }
  DPLS_RETURN_IF_ERROR(CheckPositive(g, "g"));

  DiShufCalibration calib;
  calib.n = n;
  calib.a_bar = a_bar;
  calib.g = g;
  DPLS_ASSIGN_OR_RETURN(calib.kappa_bar,
                        KappaInverse(budget.epsilon(), budget.delta()));
  DPLS_ASSIGN_OR_RETURN(calib.contraction, ComputeShuffleContraction(n, a_bar));

  const double mu = budget.mu();
  const double gain_sq = (1.0 + g) * (1.0 + g);
  calib.sigma_gamma = (1.0 + g) * mu / (std::sqrt(1.0 * n) * calib.kappa_bar);

  // Written as a variance: every term carries mu^2.
  const double alpha = calib.contraction.alpha;
  const double bracket = gain_sq * mu * mu / (gain_sq - 1.0) -
                         gain_sq * mu * mu / (n * (n - 1.0) * alpha * alpha);
  if (!(bracket > 0.0)) {
    return absl::FailedPreconditionError(absl::StrCat(
        "g=", g, " is too large for n=", n,
        ": shuffle noise variance bracket is non-positive (", bracket, ")"));
  }
  calib.log_sigma_eta_sq = std::log(n - 1.0) + 2.0 * std::log(alpha) -
                           2.0 * calib.contraction.log_one_minus_alpha -
                           2.0 * std::log(calib.kappa_bar) + std::log(bracket);
  if (calib.log_sigma_eta_sq >= std::log(DBL_MAX)) {
    return absl::OutOfRangeError(absl::StrCat(
        "shuffle noise variance e^", calib.log_sigma_eta_sq,
        " overflows double at n=", n));
  }
  calib.sigma_eta_sq = std::exp(calib.log_sigma_eta_sq);
  calib.zeta = 1.0 / (n * a_bar * a_bar + 1.0);
  return calib;
}

absl::StatusOr<double> DpVerifyNumeric(const ScalarMechanism& mechanism,
                                       const PrivacyBudget& budget) {
  const double mu = budget.mu();
  if (const auto* lap = std::get_if<TruncatedLaplaceMechanism>(&mechanism)) {
    DPLS_RETURN_IF_ERROR(CheckPositive(lap->mu, "mu"));
    DPLS_RETURN_IF_ERROR(CheckPositive(lap->epsilon, "epsilon"));
    DPLS_RETURN_IF_ERROR(CheckPositive(lap->gamma_bar, "gamma_bar"));
    return std::max(HockeyStick(*lap, budget.epsilon(), mu),
                    HockeyStick(*lap, budget.epsilon(), -mu));
  }
  const auto& gauss = std::get<GaussianMechanism>(mechanism);
  DPLS_RETURN_IF_ERROR(CheckPositive(gauss.sigma, "sigma"));
  return std::max(HockeyStick(gauss, budget.epsilon(), mu),
                  HockeyStick(gauss, budget.epsilon(), -mu));
}

}  // namespace dpls
