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

// Distributed shuffling: every agent ends up with
//   Delta_i = sum_{j in N_i} a_{i->j} a_{j->i} (thetabar_j - thetabar_i),
// computed through Paillier ciphertexts so that no agent sees a neighbour's
// thetabar_j or a_{j->i}. The Delta_i cancel exactly across the network.

#ifndef DPLS_DISHUF_H_
#define DPLS_DISHUF_H_

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "Eigen/Dense"
#include "absl/status/statusor.h"
#include "dpls/graph.h"
#include "dpls/paillier.h"
#include "dpls/problem.h"
#include "dpls/random.h"

namespace dpls {

using WideVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

// (i, j) -> a_{i->j}.
using DirectedScalars = std::map<std::pair<int, int>, int64_t>;

enum class DiShufBackend {
  // Runs every step through per-agent Paillier keys.
  kPaillier,
  // Same draws and the same fixed-point integers, without encryption. Produces
  // bit-identical Delta to kPaillier for equal seeds.
  kPlaintext,
};

struct DiShufOptions {
  double a_bar = 100.0;
  int key_bits = paillier::kDefaultKeyBits;
  int scale_bits = paillier::kDefaultScaleBits;
  DiShufBackend backend = DiShufBackend::kPaillier;
  bool record_transcript = false;
};

struct TranscriptEntry {
  enum class Kind {
    kPublicKey,
    // E_j(-thetabar_j), under the sender's key.
    kForeignCiphertext,
    // (c_ji)^{a_{j->i}}, under the receiver's own key.
    kOwnKeyCiphertext,
    // D_i((c_ji)^{a_{j->i}}) = a_{j->i} (thetabar_j - thetabar_i).
    kDecryptedScaledDifference,
  };
  Kind kind;
  int from;
  int key_owner;
  int entry;
  uint64_t hash;
  long double value;
};

struct DiShufRun {
  int scale_bits = 0;
  // thetabar_i = theta_i + eta_i as each agent holds it.
  std::vector<Eigen::VectorXd> theta_bar;
  // round(thetabar_i * 2^scale_bits), the values that actually get encrypted.
  std::vector<std::vector<mpz_class>> theta_bar_fixed;
  DirectedScalars scalars;
  // Signed Delta_i * 2^scale_bits. Sums to exactly zero over agents.
  std::vector<std::vector<mpz_class>> delta_fixed;
  std::vector<WideVector> delta;
  // Per agent; empty unless requested.
  std::vector<std::vector<TranscriptEntry>> transcripts;
};

// Draws eta_i ~ N(0, sigma_eta_sq) once per agent, scalars a_{i->j} uniform
// on the integers in [ceil(abar/sqrt 2), abar], and runs the encrypted
// exchange over the network's sorted edge list.
absl::StatusOr<DiShufRun> RunDiShuf(const Network& net,
                                    const std::vector<Eigen::VectorXd>& thetas,
                                    double sigma_eta_sq, Rng& rng,
                                    const DiShufOptions& options = {});

// Delta_i in extended-precision real arithmetic.
std::vector<WideVector> PlaintextDiShufOracle(
    const Network& net, const std::vector<WideVector>& theta_bars,
    const DirectedScalars& scalars);

}  // namespace dpls

#endif  // DPLS_DISHUF_H_
