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

#include "dpls/solvers.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dpls/status_macros.h"

namespace dpls {
namespace {

constexpr double kDivergenceFactor = 1e6;

double MeanSquareDistance(const Matrix& x, const Vector& target) {
  return (x.colwise() - target).colwise().squaredNorm().mean();
}

mpz_class ToFixed(double x, int fractional_bits) {
  return mpz_class(std::nearbyint(std::ldexp(x, fractional_bits)));
}

// round(num / den) for den > 0.
mpz_class RoundDiv(const mpz_class& num, const mpz_class& den) {
  mpz_class q;
  mpz_class twice = 2 * num + den;
  mpz_class den2 = 2 * den;
  mpz_fdiv_q(q.get_mpz_t(), twice.get_mpz_t(), den2.get_mpz_t());
  return q;
}

using InitialStateFn =
    std::function<absl::StatusOr<std::vector<std::vector<mpz_class>>>(Rng&)>;

// Shared tail of both consensus solvers: run consensus on the fixed-point
// initial states, let every agent rebuild (A_hat, B_hat) from n y_i(T) and
// solve locally. Retries once on a singular A_hat.
absl::StatusOr<SolveOutcome> ConsensusSolve(const GlobalProblem& problem,
                                            const Network& net,
                                            const AcOptions& options,
                                            const InitialStateFn& initial,
                                            Rng& rng) {
  const int n = net.size();
  const int m = problem.dim();
  if (problem.num_agents() != n) {
    return absl::InvalidArgumentError(absl::StrCat(
        "problem has ", problem.num_agents(), " agents, network has ", n));
  }
  DPLS_ASSIGN_OR_RETURN(const double rate, ConsensusRate(net));

  for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
    DPLS_ASSIGN_OR_RETURN(auto state, initial(rng));
    FixedPointConsensus consensus(net, options.fractional_bits);
    consensus.Load(std::move(state));

    double mean_scale = 0.0;
    for (const mpz_class& total : consensus.Sum()) {
      mean_scale = std::max(
          mean_scale,
          static_cast<double>(std::abs(paillier::ToLongDouble(
              total, options.fractional_bits))) / n);
    }
    const double tolerance =
        options.consensus_tolerance * std::max(1.0, mean_scale);

    int max_rounds = options.rounds;
    const double spread0 = consensus.Disagreement();
    if (max_rounds <= 0) {
      max_rounds = 10;
      if (spread0 > tolerance) {
        const double needed = std::log(tolerance / spread0) / std::log(rate);
        max_rounds = static_cast<int>(std::min(1.5 * needed + 10.0, 1e7));
      }
    }
    const mpz_class limit(
        std::floor(std::ldexp(tolerance, options.fractional_bits)));
    int rounds = 0;
    bool agreed = consensus.SpreadAtMost(limit);
    while (!agreed && rounds < max_rounds) {
      consensus.Step();
      ++rounds;
      agreed = consensus.SpreadAtMost(limit);
    }
    const double spread = consensus.Disagreement();
    if (!agreed) {
      return absl::FailedPreconditionError(absl::StrCat(
          "consensus did not converge in ", rounds,
          " rounds: disagreement ", spread, " > ", tolerance,
          "; increase the round budget"));
    }

    std::vector<Vector> theta_hats;
    theta_hats.reserve(n);
    for (int i = 0; i < n; ++i) theta_hats.push_back(n * consensus.Value(i));
    if (options.theta_hat_hook) options.theta_hat_hook(attempt, theta_hats);

    SolveOutcome out;
    out.iterations = rounds;
    out.early_stopped = rounds < max_rounds;
    out.consensus_disagreement = spread;
    out.attempts = attempt;
    bool singular = false;
    for (int i = 0; i < n && !singular; ++i) {
      auto unpacked = UnpackTheta(theta_hats[i], m);
      if (!unpacked.ok()) return unpacked.status();
      const auto& [a_hat, b_hat] = *unpacked;
      Eigen::FullPivLU<Matrix> lu(a_hat);
      if (!lu.isInvertible()) {
        singular = true;
        break;
      }
      out.agent_solutions.push_back(-lu.solve(b_hat));
      if (i == 0) {
        out.a_hat = a_hat;
        out.b_hat = b_hat;
      }
    }
    if (singular) continue;
    out.theta_hat = theta_hats.front();
    out.x_hat = Vector::Zero(m);
    for (const Vector& x : out.agent_solutions) out.x_hat += x;
    out.x_hat /= n;
    return out;
  }
  return absl::FailedPreconditionError(absl::StrCat(
      "reconstructed A_hat singular in all ", options.max_attempts,
      " attempts"));
}

}  // namespace

absl::StatusOr<SolveOutcome> DpGtSolve(const GlobalProblem& problem,
                                       const Network& net,
                                       const PrivacyBudget& budget,
                                       const GtNoiseCalibration& calib,
                                       const GtOptions& options, Rng& rng) {
  const int n = net.size();
  const int m = problem.dim();
  if (problem.num_agents() != n) {
    return absl::InvalidArgumentError(absl::StrCat(
        "problem has ", problem.num_agents(), " agents, network has ", n));
  }
  if (!(options.beta > 0.0)) {
    return absl::InvalidArgumentError("beta must be positive");
  }
  if (options.rounds < 0) {
    return absl::InvalidArgumentError("rounds must be non-negative");
  }
  const Vector x_star = ExactSolution(problem);

  // One-shot perturbation of the local data.
  const uint64_t base = rng();
  std::vector<Matrix> g(n);
  Matrix h(m, n);
  Vector gamma_sum = Vector::Zero(PackedSize(m));
  for (int i = 0; i < n; ++i) {
    Rng agent_rng(DeriveSeed(base, i));
    const QuadraticCost& cost = problem.costs()[i];
    Vector gamma = Vector::Zero(PackedSize(m));
    Vector eta = Vector::Zero(m);
    if (!options.noise_off) {
      for (int k = 0; k < gamma.size(); ++k) {
        DPLS_ASSIGN_OR_RETURN(
            gamma[k], SampleTruncatedLaplace(budget.mu(), budget.epsilon(),
                                             calib.gamma_bar, agent_rng));
      }
      for (int k = 0; k < m; ++k) {
        eta[k] = SampleGaussian(calib.sigma_eta, agent_rng);
      }
    }
    gamma_sum += gamma;
    DPLS_ASSIGN_OR_RETURN(g[i], Devectorize(cost.packed_a() + gamma));
    h.col(i) = cost.b() + eta;
  }

  SolveOutcome out;
  DPLS_ASSIGN_OR_RETURN(const Matrix omega_a, Devectorize(gamma_sum));
  out.omega_a_frobenius = omega_a.norm();
  if (out.omega_a_frobenius > m * n * calib.gamma_bar * (1 + 1e-12) + 1e-300) {
    return absl::InternalError(absl::StrCat(
        "||Omega_A||_F = ", out.omega_a_frobenius,
        " exceeds the support bound m n gamma_bar"));
  }
  out.a_hat = problem.a_sum() + omega_a;
  out.b_hat = h.rowwise().sum();
  {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(out.a_hat, Eigen::EigenvaluesOnly);
    out.hessian_positive_definite = eig.eigenvalues()[0] > 0.0;
    Eigen::FullPivLU<Matrix> lu(out.a_hat);
    if (lu.isInvertible()) out.limit = Vector(-lu.solve(out.b_hat));
  }

  Matrix x = Matrix::Zero(m, n);
  Matrix s = h;
  Matrix x_next(m, n);
  Matrix s_next(m, n);
  double reference = x_star.squaredNorm();
  if (out.limit) {
    reference = std::max(reference, (*out.limit - x_star).squaredNorm());
  }
  reference = std::max(reference, 1e-8);

  auto record = [&](int round) {
    if (!options.record_trajectory) return;
    out.trajectory.push_back(
        {round, MeanSquareDistance(x, x_star),
         out.limit ? MeanSquareDistance(x, *out.limit)
                   : std::numeric_limits<double>::quiet_NaN()});
  };
  auto check_tracking = [&]() {
    if (!options.check_tracking) return;
    Vector lhs = s.rowwise().sum();
    Vector rhs = Vector::Zero(m);
    for (int i = 0; i < n; ++i) rhs += g[i] * x.col(i) + h.col(i);
    const double violation = (lhs - rhs).norm() / (1.0 + rhs.norm());
    out.max_tracking_violation =
        std::max(out.max_tracking_violation, violation);
  };

  record(0);
  check_tracking();
  int t = 0;
  while (t < options.rounds) {
    for (int i = 0; i < n; ++i) {
      Vector mix_x = x.col(i);
      Vector mix_s = s.col(i);
      for (const Neighbor& nb : net.neighbors(i)) {
        mix_x += nb.weight * (x.col(nb.agent) - x.col(i));
        mix_s += nb.weight * (s.col(nb.agent) - s.col(i));
      }
      x_next.col(i) = mix_x - options.beta * s.col(i);
      s_next.col(i) = mix_s + g[i] * (x_next.col(i) - x.col(i));
    }
    const double change = (x_next - x).colwise().norm().maxCoeff();
    x.swap(x_next);
    s.swap(s_next);
    ++t;
    record(t);
    check_tracking();

    const double error = (x.colwise() - x_star).colwise().squaredNorm().maxCoeff();
    if (!std::isfinite(error) || error > kDivergenceFactor * reference) {
      return absl::FailedPreconditionError(absl::StrCat(
          "gradient tracking diverged at round ", t, " (error ", error,
          "); the step size beta=", options.beta, " is too large"));
    }
    if (options.early_stop_tolerance > 0.0 &&
        change < options.early_stop_tolerance) {
      out.early_stopped = true;
      break;
    }
  }
  out.iterations = t;
  out.x_hat = x.rowwise().mean();
  out.agent_solutions.reserve(n);
  for (int i = 0; i < n; ++i) out.agent_solutions.push_back(x.col(i));
  return out;
}

std::vector<Vector> AverageConsensus(const Network& net, std::vector<Vector> y,
                                     int rounds) {
  std::vector<Vector> next = y;
  for (int t = 0; t < rounds; ++t) {
    for (int i = 0; i < net.size(); ++i) {
      next[i] = y[i];
      for (const Neighbor& nb : net.neighbors(i)) {
        next[i] += nb.weight * (y[nb.agent] - y[i]);
      }
    }
    std::swap(y, next);
  }
  return y;
}

FixedPointConsensus::FixedPointConsensus(const Network& net,
                                         int fractional_bits)
    : fractional_bits_(fractional_bits) {
  for (const Edge& e : net.edges()) {
    int exponent = 0;
    const double fraction = std::frexp(e.weight, &exponent);
    // weight = fraction 2^exponent with fraction in [0.5, 1): 53 bits exact.
    const long mantissa = static_cast<long>(std::ldexp(fraction, 53));
    const int shift = 53 - exponent;
    edges_.push_back({e.i, e.j, mantissa, shift, mpz_class(1) << (shift - 1)});
  }
}

void FixedPointConsensus::Load(std::vector<std::vector<mpz_class>> state) {
  state_ = std::move(state);
  const size_t dim = state_.empty() ? 0 : state_.front().size();
  flux_.assign(edges_.size() * dim, mpz_class(0));
}

void FixedPointConsensus::Step() {
  if (state_.empty()) return;
  const size_t dim = state_.front().size();
  mpz_class diff;
  for (size_t e = 0; e < edges_.size(); ++e) {
    const ScaledEdge& edge = edges_[e];
    for (size_t k = 0; k < dim; ++k) {
      // flux = round(w_ij (y_j - y_i)), carried from j to i.
      mpz_class& flux = flux_[e * dim + k];
      diff = state_[edge.j][k] - state_[edge.i][k];
      mpz_mul_si(flux.get_mpz_t(), diff.get_mpz_t(), edge.mantissa);
      flux += edge.half;
      mpz_fdiv_q_2exp(flux.get_mpz_t(), flux.get_mpz_t(), edge.shift);
    }
  }
  for (size_t e = 0; e < edges_.size(); ++e) {
    const ScaledEdge& edge = edges_[e];
    for (size_t k = 0; k < dim; ++k) {
      state_[edge.i][k] += flux_[e * dim + k];
      state_[edge.j][k] -= flux_[e * dim + k];
    }
  }
}

bool FixedPointConsensus::SpreadAtMost(const mpz_class& limit) const {
  if (state_.empty()) return true;
  mpz_class spread;
  for (size_t k = 0; k < state_.front().size(); ++k) {
    const mpz_class* lo = &state_[0][k];
    const mpz_class* hi = &state_[0][k];
    for (size_t i = 1; i < state_.size(); ++i) {
      if (state_[i][k] < *lo) lo = &state_[i][k];
      if (state_[i][k] > *hi) hi = &state_[i][k];
    }
    spread = *hi - *lo;
    if (spread > limit) return false;
  }
  return true;
}

double FixedPointConsensus::Disagreement() const {
  if (state_.empty()) return 0.0;
  long double worst = 0.0L;
  for (size_t k = 0; k < state_.front().size(); ++k) {
    const mpz_class* lo = &state_[0][k];
    const mpz_class* hi = &state_[0][k];
    for (size_t i = 1; i < state_.size(); ++i) {
      if (state_[i][k] < *lo) lo = &state_[i][k];
      if (state_[i][k] > *hi) hi = &state_[i][k];
    }
    worst = std::max(worst,
                     paillier::ToLongDouble(*hi - *lo, fractional_bits_));
  }
  return static_cast<double>(worst);
}

Vector FixedPointConsensus::Value(int agent) const {
  const auto& row = state_[agent];
  Vector out(row.size());
  for (size_t k = 0; k < row.size(); ++k) {
    out[k] = static_cast<double>(paillier::ToLongDouble(row[k], fractional_bits_));
  }
  return out;
}

std::vector<mpz_class> FixedPointConsensus::Sum() const {
  if (state_.empty()) return {};
  std::vector<mpz_class> total(state_.front().size(), mpz_class(0));
  for (const auto& row : state_) {
    for (size_t k = 0; k < row.size(); ++k) total[k] += row[k];
  }
  return total;
}

absl::StatusOr<SolveOutcome> DpDiShufAcSolve(const GlobalProblem& problem,
                                             const Network& net,
                                             const DiShufCalibration& calib,
                                             const AcOptions& options,
                                             Rng& rng) {
  const int n = net.size();
  const int m = problem.dim();
  if (calib.n != n) {
    return absl::InvalidArgumentError(absl::StrCat(
        "calibration is for n=", calib.n, ", network has ", n, " agents"));
  }
  if (calib.a_bar != std::floor(calib.a_bar)) {
    return absl::InvalidArgumentError("a_bar must be an integer");
  }
  std::vector<Vector> thetas;
  thetas.reserve(problem.num_agents());
  for (const QuadraticCost& cost : problem.costs()) {
    thetas.push_back(PackTheta(cost).values());
  }
  DiShufOptions dishuf = options.dishuf;
  dishuf.a_bar = calib.a_bar;
  const double sigma_eta_sq = options.noise_off ? 0.0 : calib.sigma_eta_sq;
  const double sigma_gamma = options.noise_off ? 0.0 : calib.sigma_gamma;
  const int bits = options.fractional_bits;
  // zeta = 1 / (n abar^2 + 1), applied to Delta in exact integer arithmetic.
  const mpz_class a_bar_int(calib.a_bar);
  const mpz_class zeta_den = n * a_bar_int * a_bar_int + 1;

  InitialStateFn initial =
      [&](Rng& trial_rng) -> absl::StatusOr<std::vector<std::vector<mpz_class>>> {
    DPLS_ASSIGN_OR_RETURN(DiShufRun shuffle,
                          RunDiShuf(net, thetas, sigma_eta_sq, trial_rng, dishuf));
    const int shift = bits - shuffle.scale_bits;
    const uint64_t base = trial_rng();
    std::vector<std::vector<mpz_class>> state(n);
    for (int i = 0; i < n; ++i) {
      Rng agent_rng(DeriveSeed(base, i));
      state[i].reserve(thetas[i].size());
      for (int k = 0; k < thetas[i].size(); ++k) {
        const double gamma = SampleGaussian(sigma_gamma, agent_rng);
        mpz_class scaled_delta = shuffle.delta_fixed[i][k];
        if (shift >= 0) {
          scaled_delta <<= shift;
        } else {
          scaled_delta = RoundDiv(scaled_delta, mpz_class(1) << -shift);
        }
        state[i].push_back(ToFixed(thetas[i][k] + gamma, bits) +
                           RoundDiv(scaled_delta, zeta_den));
      }
    }
    return state;
  };
  (void)m;
  return ConsensusSolve(problem, net, options, initial, rng);
}

absl::StatusOr<SolveOutcome> DpAcBaselineSolve(const GlobalProblem& problem,
                                               const Network& net,
                                               double sigma,
                                               const AcOptions& options,
                                               Rng& rng) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    return absl::InvalidArgumentError("sigma must be finite and >= 0");
  }
  const int n = net.size();
  std::vector<Vector> thetas;
  for (const QuadraticCost& cost : problem.costs()) {
    thetas.push_back(PackTheta(cost).values());
  }
  const double stddev = options.noise_off ? 0.0 : sigma;
  const int bits = options.fractional_bits;
  InitialStateFn initial =
      [&](Rng& trial_rng) -> absl::StatusOr<std::vector<std::vector<mpz_class>>> {
    const uint64_t base = trial_rng();
    std::vector<std::vector<mpz_class>> state(n);
    for (int i = 0; i < n; ++i) {
      Rng agent_rng(DeriveSeed(base, i));
      for (int k = 0; k < thetas[i].size(); ++k) {
        state[i].push_back(
            ToFixed(thetas[i][k] + SampleGaussian(stddev, agent_rng), bits));
      }
    }
    return state;
  };
  return ConsensusSolve(problem, net, options, initial, rng);
}

double GtMeanSquareErrorBound(const GlobalProblem& problem,
                              const GtNoiseCalibration& calib) {
  const double n = problem.num_agents();
  const double m = problem.dim();
  const double x_norm_sq = ExactSolution(problem).squaredNorm();
  const double lambda = problem.lambda_min();
  const double sigma_eta_sq = calib.sigma_eta * calib.sigma_eta;
  return (2.0 * n * m * m * calib.sigma_gamma_sq * x_norm_sq +
          2.0 * n * m * sigma_eta_sq) /
         ((1.0 - calib.d) * (1.0 - calib.d) * lambda * lambda);
}

absl::StatusOr<int> ConsensusRoundsFor(const Network& net, double reduction) {
  if (!(reduction > 0.0 && reduction < 1.0)) {
    return absl::InvalidArgumentError("reduction must lie in (0,1)");
  }
  DPLS_ASSIGN_OR_RETURN(const double rate, ConsensusRate(net));
  return static_cast<int>(std::ceil(std::log(reduction) / std::log(rate)));
}

}  // namespace dpls
