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

#include "dpls/dishuf.h"

#include <cmath>
#include <deque>
#include <string>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dpls/mechanisms.h"
#include "dpls/status_macros.h"

namespace dpls {
namespace {

uint64_t HashCiphertext(const paillier::Ciphertext& c) {
  size_t count = 0;
  void* raw = mpz_export(nullptr, &count, 1, 1, 1, 0, c.value.get_mpz_t());
  const auto* bytes = static_cast<const unsigned char*>(raw);
  uint64_t h = 0xcbf29ce484222325ULL;
  for (size_t k = 0; k < count; ++k) {
    h ^= bytes[k];
    h *= 0x100000001b3ULL;
  }
  void (*free_fn)(void*, size_t);
  mp_get_memory_functions(nullptr, nullptr, &free_fn);
  free_fn(raw, count);
  return h;
}

mpz_class SignedFixed(double x, int scale_bits) {
  return mpz_class(std::nearbyint(std::ldexp(x, scale_bits)));
}

absl::Status CheckInputs(const Network& net,
                         const std::vector<Eigen::VectorXd>& thetas,
                         double sigma_eta_sq, const DiShufOptions& options) {
  if (static_cast<int>(thetas.size()) != net.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "got ", thetas.size(), " data vectors for ", net.size(), " agents"));
  }
  if (thetas.empty() || thetas.front().size() == 0) {
    return absl::InvalidArgumentError("data vectors must be non-empty");
  }
  for (const auto& t : thetas) {
    if (t.size() != thetas.front().size()) {
      return absl::InvalidArgumentError("data vectors differ in length");
    }
  }
  if (!(options.a_bar >= 10.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("a_bar must be >= 10, got ", options.a_bar));
  }
  if (!(sigma_eta_sq >= 0.0) || !std::isfinite(sigma_eta_sq)) {
    return absl::InvalidArgumentError("sigma_eta_sq must be finite and >= 0");
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<DiShufRun> RunDiShuf(const Network& net,
                                    const std::vector<Eigen::VectorXd>& thetas,
                                    double sigma_eta_sq, Rng& rng,
                                    const DiShufOptions& options) {
  DPLS_RETURN_IF_ERROR(CheckInputs(net, thetas, sigma_eta_sq, options));
  const int n = net.size();
  const int dim = static_cast<int>(thetas.front().size());
  const int scale_bits = options.scale_bits;

  // Noise and scalars come from one stream per agent, key material and
  // encryption randomness from another, so both backends see equal draws.
  const uint64_t base = rng();
  std::vector<Rng> agent_rng;
  agent_rng.reserve(n);
  for (int i = 0; i < n; ++i) agent_rng.emplace_back(DeriveSeed(base, 2 * i));

  DiShufRun run;
  run.scale_bits = scale_bits;
  run.theta_bar.resize(n);
  run.theta_bar_fixed.resize(n);
  const double sigma_eta = std::sqrt(sigma_eta_sq);
  mpz_class max_fixed = 0;
  // Local perturbation and quantization.
  for (int i = 0; i < n; ++i) {
    run.theta_bar[i] = thetas[i];
    for (int k = 0; k < dim; ++k) {
      run.theta_bar[i][k] += SampleGaussian(sigma_eta, agent_rng[i]);
    }
    if (!run.theta_bar[i].allFinite()) {
      return absl::OutOfRangeError("perturbed data is not finite");
    }
    run.theta_bar_fixed[i].reserve(dim);
    for (int k = 0; k < dim; ++k) {
      mpz_class v = SignedFixed(run.theta_bar[i][k], scale_bits);
      if (abs(v) > max_fixed) max_fixed = abs(v);
      run.theta_bar_fixed[i].push_back(std::move(v));
    }
  }
  // Pairwise scalars, drawn up front in sorted neighbour order.
  const auto a_lo = static_cast<int64_t>(std::ceil(options.a_bar / std::sqrt(2.0)));
  const auto a_hi = static_cast<int64_t>(std::floor(options.a_bar));
  for (int i = 0; i < n; ++i) {
    std::uniform_int_distribution<int64_t> pick(a_lo, a_hi);
    for (const Neighbor& nb : net.neighbors(i)) {
      run.scalars[{i, nb.agent}] = pick(agent_rng[i]);
    }
  }

  // Every signed intermediate, up to the full Delta_i, must stay below N/4
  // for the smallest admissible modulus 2^(key_bits - 1).
  const mpz_class bound =
      2 * max_fixed * a_hi * a_hi * static_cast<int64_t>(net.max_degree());
  mpz_class headroom = 1;
  headroom <<= (options.key_bits - 3);
  if (bound >= headroom) {
    return absl::OutOfRangeError(absl::StrCat(
        "DiShuf values need ", mpz_sizeinbase(bound.get_mpz_t(), 2),
        " bits but a ", options.key_bits,
        "-bit key only leaves ", options.key_bits - 3,
        "; lower a_bar or raise the key size"));
  }

  run.delta_fixed.assign(n, std::vector<mpz_class>(dim, mpz_class(0)));
  if (options.record_transcript) run.transcripts.resize(n);

  if (options.backend == DiShufBackend::kPlaintext) {
    for (int i = 0; i < n; ++i) {
      for (const Neighbor& nb : net.neighbors(i)) {
        const int j = nb.agent;
        const int64_t a_ij = run.scalars.at({i, j});
        const int64_t a_ji = run.scalars.at({j, i});
        for (int k = 0; k < dim; ++k) {
          // What j decrypts, then scales by its own a_ji.
          mpz_class received =
              a_ij * (run.theta_bar_fixed[i][k] - run.theta_bar_fixed[j][k]);
          run.delta_fixed[j][k] += a_ji * received;
        }
      }
    }
  } else {
    std::deque<paillier::BigRandom> crypto_rng;
    std::vector<paillier::Keypair> keys;
    std::vector<paillier::FixedPointCodec> codecs;
    keys.reserve(n);
    for (int i = 0; i < n; ++i) {
      crypto_rng.emplace_back(DeriveSeed(base, 2 * i + 1));
      DPLS_ASSIGN_OR_RETURN(paillier::Keypair key,
                            paillier::KeyGen(options.key_bits, crypto_rng[i]));
      DPLS_ASSIGN_OR_RETURN(
          paillier::FixedPointCodec codec,
          paillier::FixedPointCodec::Create(key.pk.n, scale_bits));
      keys.push_back(std::move(key));
      codecs.push_back(std::move(codec));
    }

    // E_i(-thetabar_i), broadcast with the public key.
    std::vector<std::vector<paillier::Ciphertext>> negated(n);
    for (int i = 0; i < n; ++i) {
      negated[i].reserve(dim);
      for (int k = 0; k < dim; ++k) {
        DPLS_ASSIGN_OR_RETURN(
            paillier::Ciphertext c,
            paillier::Encrypt(keys[i].pk,
                              codecs[i].Wrap(-run.theta_bar_fixed[i][k]),
                              crypto_rng[i]));
        negated[i].push_back(std::move(c));
      }
      if (options.record_transcript) {
        for (const Neighbor& nb : net.neighbors(i)) {
          auto& log = run.transcripts[nb.agent];
          log.push_back({TranscriptEntry::Kind::kPublicKey, i, i, -1, 0, 0.0L});
          for (int k = 0; k < dim; ++k) {
            log.push_back({TranscriptEntry::Kind::kForeignCiphertext, i, i, k,
                           HashCiphertext(negated[i][k]), 0.0L});
          }
        }
      }
    }

    // Masked differences, edge by edge in sorted order.
    for (int i = 0; i < n; ++i) {
      for (const Neighbor& nb : net.neighbors(i)) {
        const int j = nb.agent;
        const paillier::PublicKey& pk_j = keys[j].pk;
        const int64_t a_ij = run.scalars.at({i, j});
        const int64_t a_ji = run.scalars.at({j, i});
        for (int k = 0; k < dim; ++k) {
          DPLS_ASSIGN_OR_RETURN(
              paillier::Ciphertext own,
              paillier::Encrypt(pk_j, codecs[j].Wrap(run.theta_bar_fixed[i][k]),
                                crypto_rng[i]));
          DPLS_ASSIGN_OR_RETURN(paillier::Ciphertext c_ij,
                                paillier::HomAdd(pk_j, own, negated[j][k]));
          DPLS_ASSIGN_OR_RETURN(
              paillier::Ciphertext scaled,
              paillier::HomScale(pk_j, c_ij, mpz_class(static_cast<long>(a_ij))));
          // Decryption at the receiver j.
          DPLS_ASSIGN_OR_RETURN(mpz_class residue,
                                paillier::Decrypt(keys[j], scaled));
          const mpz_class received = codecs[j].Lift(residue);
          run.delta_fixed[j][k] += a_ji * received;
          if (options.record_transcript) {
            auto& log = run.transcripts[j];
            log.push_back({TranscriptEntry::Kind::kOwnKeyCiphertext, i, j, k,
                           HashCiphertext(scaled), 0.0L});
            log.push_back({TranscriptEntry::Kind::kDecryptedScaledDifference, i,
                           j, k, 0, codecs[j].DecodeSigned(received)});
          }
        }
      }
    }
  }

  run.delta.reserve(n);
  for (int i = 0; i < n; ++i) {
    WideVector d(dim);
    for (int k = 0; k < dim; ++k) {
      d[k] = paillier::ToLongDouble(run.delta_fixed[i][k], scale_bits);
    }
    run.delta.push_back(std::move(d));
  }
  return run;
}

std::vector<WideVector> PlaintextDiShufOracle(
    const Network& net, const std::vector<WideVector>& theta_bars,
    const DirectedScalars& scalars) {
  std::vector<WideVector> delta;
  delta.reserve(net.size());
  for (int i = 0; i < net.size(); ++i) {
    WideVector d = WideVector::Zero(theta_bars[i].size());
    for (const Neighbor& nb : net.neighbors(i)) {
      const int j = nb.agent;
      const long double gain =
          static_cast<long double>(scalars.at({i, j})) * scalars.at({j, i});
      d += gain * (theta_bars[j] - theta_bars[i]);
    }
    delta.push_back(std::move(d));
  }
  return delta;
}

}  // namespace dpls
