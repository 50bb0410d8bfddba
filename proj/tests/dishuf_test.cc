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
#include <set>
#include <vector>

#include "gtest/gtest.h"

namespace dpls {
namespace {

std::vector<Eigen::VectorXd> RandomThetas(int n, int dim, Rng& rng) {
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<Eigen::VectorXd> out(n, Eigen::VectorXd(dim));
  for (auto& t : out) {
    for (int k = 0; k < dim; ++k) t[k] = u(rng);
  }
  return out;
}

DiShufOptions FastOptions(DiShufBackend backend) {
  DiShufOptions options;
  options.key_bits = 512;
  options.backend = backend;
  return options;
}

TEST(PlaintextOracleTest, HandWorkedTriangle) {
  const Network net = *BuildCycle(3, 0.3);
  DirectedScalars ones;
  for (int i = 0; i < 3; ++i) {
    for (const Neighbor& nb : net.neighbors(i)) ones[{i, nb.agent}] = 1;
  }
  std::vector<WideVector> theta(3, WideVector(1));
  theta[0][0] = 1;
  theta[1][0] = 2;
  theta[2][0] = 4;
  const auto delta = PlaintextDiShufOracle(net, theta, ones);
  EXPECT_EQ(delta[0][0], 4.0L);
  EXPECT_EQ(delta[1][0], 1.0L);
  EXPECT_EQ(delta[2][0], -5.0L);
}

TEST(PlaintextOracleTest, EqualInputsGiveZero) {
  const Network net = *BuildCycle(5, 0.3);
  DirectedScalars scalars;
  int64_t next = 71;
  for (int i = 0; i < 5; ++i) {
    for (const Neighbor& nb : net.neighbors(i)) scalars[{i, nb.agent}] = next++;
  }
  std::vector<WideVector> theta(5, WideVector::Constant(2, 3.25L));
  for (const WideVector& d : PlaintextDiShufOracle(net, theta, scalars)) {
    EXPECT_EQ(d.squaredNorm(), 0.0L);
  }
}

TEST(RunDiShufTest, ScalarsInRangeAndSumIsZero) {
  const Network net = *BuildCycle(6, 0.3);
  Rng rng(31);
  const auto thetas = RandomThetas(6, 4, rng);
  auto run = RunDiShuf(net, thetas, 2.0, rng,
                       FastOptions(DiShufBackend::kPaillier));
  ASSERT_TRUE(run.ok()) << run.status();
  EXPECT_EQ(run->scalars.size(), 12u);
  for (const auto& [edge, a] : run->scalars) {
    EXPECT_GE(a, 71);
    EXPECT_LE(a, 100);
  }
  for (int k = 0; k < 4; ++k) {
    mpz_class total = 0;
    for (int i = 0; i < 6; ++i) total += run->delta_fixed[i][k];
    EXPECT_EQ(total, 0) << k;
  }
}

TEST(RunDiShufTest, MatchesOracleOnQuantizedInputs) {
  const Network net = *BuildCycle(5, 0.3);
  Rng rng(32);
  const auto thetas = RandomThetas(5, 3, rng);
  auto run = *RunDiShuf(net, thetas, 1.0, rng,
                        FastOptions(DiShufBackend::kPaillier));
  std::vector<WideVector> quantized;
  for (const auto& fixed : run.theta_bar_fixed) {
    WideVector v(fixed.size());
    for (size_t k = 0; k < fixed.size(); ++k) {
      v[k] = paillier::ToLongDouble(fixed[k], run.scale_bits);
    }
    quantized.push_back(v);
  }
  const auto oracle = PlaintextDiShufOracle(net, quantized, run.scalars);
  for (int i = 0; i < 5; ++i) {
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR(static_cast<double>(run.delta[i][k]),
                  static_cast<double>(oracle[i][k]), 1e-9);
    }
    // Quantization is the only gap to the unrounded perturbed data.
    EXPECT_LE((run.theta_bar[i] - quantized[i].cast<double>()).cwiseAbs().maxCoeff(),
              std::ldexp(1.0, -run.scale_bits));
  }
}

TEST(RunDiShufTest, NoiseIsApplied) {
  const Network net = *BuildCycle(4, 0.3);
  Rng rng(33);
  const auto thetas = RandomThetas(4, 2, rng);
  auto quiet = *RunDiShuf(net, thetas, 0.0, rng,
                          FastOptions(DiShufBackend::kPlaintext));
  auto noisy = *RunDiShuf(net, thetas, 100.0, rng,
                          FastOptions(DiShufBackend::kPlaintext));
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(quiet.theta_bar[i], thetas[i]);
    EXPECT_NE(noisy.theta_bar[i], thetas[i]);
  }
}

TEST(RunDiShufTest, BackendsAreBitIdentical) {
  const Network net = *BuildCycle(5, 0.3);
  Rng seed_source(34);
  const auto thetas = RandomThetas(5, 3, seed_source);
  Rng a(35), b(35);
  auto enc = *RunDiShuf(net, thetas, 3.0, a,
                        FastOptions(DiShufBackend::kPaillier));
  auto plain = *RunDiShuf(net, thetas, 3.0, b,
                          FastOptions(DiShufBackend::kPlaintext));
  EXPECT_EQ(enc.scalars, plain.scalars);
  EXPECT_EQ(enc.delta_fixed, plain.delta_fixed);
  EXPECT_EQ(enc.theta_bar_fixed, plain.theta_bar_fixed);
  EXPECT_EQ(a(), b());
}

TEST(RunDiShufTest, DeterministicForEqualSeeds) {
  const Network net = *BuildCycle(4, 0.3);
  Rng seed_source(36);
  const auto thetas = RandomThetas(4, 2, seed_source);
  Rng a(37), b(37), c(38);
  auto first = *RunDiShuf(net, thetas, 1.0, a,
                          FastOptions(DiShufBackend::kPaillier));
  auto second = *RunDiShuf(net, thetas, 1.0, b,
                           FastOptions(DiShufBackend::kPaillier));
  auto third = *RunDiShuf(net, thetas, 1.0, c,
                          FastOptions(DiShufBackend::kPaillier));
  EXPECT_EQ(first.delta_fixed, second.delta_fixed);
  EXPECT_NE(first.delta_fixed, third.delta_fixed);
}

TEST(RunDiShufTest, TranscriptHidesNeighbourData) {
  const Network net = *BuildCycle(4, 0.3);
  Rng rng(39);
  const auto thetas = RandomThetas(4, 2, rng);
  DiShufOptions options = FastOptions(DiShufBackend::kPaillier);
  options.record_transcript = true;
  auto run = *RunDiShuf(net, thetas, 1.0, rng, options);
  ASSERT_EQ(run.transcripts.size(), 4u);
  for (int i = 0; i < 4; ++i) {
    std::set<int> neighbours;
    for (const Neighbor& nb : net.neighbors(i)) neighbours.insert(nb.agent);
    int decrypted = 0;
    for (const TranscriptEntry& e : run.transcripts[i]) {
      EXPECT_TRUE(neighbours.count(e.from)) << "agent " << i;
      switch (e.kind) {
        case TranscriptEntry::Kind::kPublicKey:
        case TranscriptEntry::Kind::kForeignCiphertext:
          EXPECT_EQ(e.key_owner, e.from);
          EXPECT_NE(e.key_owner, i);
          break;
        case TranscriptEntry::Kind::kOwnKeyCiphertext:
          EXPECT_EQ(e.key_owner, i);
          break;
        case TranscriptEntry::Kind::kDecryptedScaledDifference: {
          ++decrypted;
          const int j = e.from;
          const long double a = run.scalars.at({j, i});
          const long double diff =
              paillier::ToLongDouble(run.theta_bar_fixed[j][e.entry] -
                                         run.theta_bar_fixed[i][e.entry],
                                     run.scale_bits);
          EXPECT_NEAR(static_cast<double>(e.value),
                      static_cast<double>(a * diff), 1e-9);
          // The plaintext a receiver sees is never the sender's raw value.
          EXPECT_NE(e.value, static_cast<long double>(run.theta_bar[j][e.entry]));
          break;
        }
      }
    }
    EXPECT_EQ(decrypted, 2 * 2);
  }
}

TEST(RunDiShufTest, HeadroomExhaustionIsOutOfRange) {
  const Network net = *BuildCycle(3, 0.3);
  std::vector<Eigen::VectorXd> thetas(3, Eigen::VectorXd::Constant(1, 1e60));
  thetas[1][0] = -1e60;
  Rng rng(40);
  DiShufOptions options = FastOptions(DiShufBackend::kPaillier);
  options.key_bits = 256;
  auto run = RunDiShuf(net, thetas, 0.0, rng, options);
  EXPECT_TRUE(absl::IsOutOfRange(run.status())) << run.status();
}

TEST(RunDiShufTest, InputValidation) {
  const Network net = *BuildCycle(3, 0.3);
  Rng rng(41);
  auto thetas = RandomThetas(3, 2, rng);
  EXPECT_FALSE(RunDiShuf(net, RandomThetas(2, 2, rng), 1.0, rng).ok());
  EXPECT_FALSE(RunDiShuf(net, thetas, -1.0, rng).ok());
  DiShufOptions small;
  small.a_bar = 5;
  EXPECT_FALSE(RunDiShuf(net, thetas, 1.0, rng, small).ok());
  thetas[2] = Eigen::VectorXd(3);
  EXPECT_FALSE(RunDiShuf(net, thetas, 1.0, rng).ok());
}

}  // namespace
}  // namespace dpls
