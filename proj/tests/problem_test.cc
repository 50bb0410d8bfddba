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

#include "dpls/problem.h"

#include <random>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dpls {
namespace {

using ::testing::HasSubstr;

// 1-based index formula written out independently of the library.
int OracleIndex(int m, int p, int q) {
  return (2 * m - p + 2) * (p - 1) / 2 + q - (p - 1);
}

Matrix RandomSymmetric(int m, Rng& rng) {
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  Matrix a(m, m);
  for (int p = 0; p < m; ++p) {
    for (int q = p; q < m; ++q) a(p, q) = a(q, p) = u(rng);
  }
  return a;
}

TEST(VectorizeTest, SingleEntry) {
  Matrix a(1, 1);
  a << 5;
  auto v = Vectorize(a);
  ASSERT_TRUE(v.ok());
  EXPECT_EQ(*v, (Vector(1) << 5).finished());
}

TEST(VectorizeTest, TwoByTwo) {
  Matrix a(2, 2);
  a << 1, 2, 2, 3;
  EXPECT_EQ(*Vectorize(a), (Vector(3) << 1, 2, 3).finished());
  EXPECT_EQ(*Devectorize((Vector(3) << 1, 2, 3).finished()), a);
}

TEST(VectorizeTest, MatchesIndexFormulaForEveryEntry) {
  Rng rng(1);
  for (int m = 1; m <= 7; ++m) {
    const Matrix a = RandomSymmetric(m, rng);
    const Vector v = *Vectorize(a);
    ASSERT_EQ(v.size(), m * (m + 1) / 2);
    std::vector<bool> seen(v.size(), false);
    for (int p = 1; p <= m; ++p) {
      for (int q = p; q <= m; ++q) {
        const int k = OracleIndex(m, p, q);
        ASSERT_GE(k, 1);
        ASSERT_LE(k, v.size());
        EXPECT_EQ(v[k - 1], a(p - 1, q - 1));
        EXPECT_FALSE(seen[k - 1]);
        seen[k - 1] = true;
      }
    }
  }
}

TEST(VectorizeTest, ThreeByThreeUpperTriangleOrder) {
  Matrix a(3, 3);
  a << 11, 12, 13, 12, 22, 23, 13, 23, 33;
  EXPECT_EQ(*Vectorize(a), (Vector(6) << 11, 12, 13, 22, 23, 33).finished());
}

TEST(VectorizeTest, ZerosDevectorizeToZeroMatrix) {
  EXPECT_EQ(*Devectorize(Vector::Zero(6)), Matrix::Zero(3, 3));
}

TEST(VectorizeTest, RejectsAsymmetricAndNonSquare) {
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  EXPECT_THAT(Vectorize(a).status().message(), HasSubstr("symmetric"));
  EXPECT_FALSE(Vectorize(Matrix::Zero(2, 3)).ok());
  EXPECT_FALSE(Devectorize(Vector::Zero(4)).ok());
}

TEST(VectorizeTest, RoundTripProperty) {
  Rng rng(2);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int m = 1; m <= 6; ++m) {
    for (int rep = 0; rep < 100; ++rep) {
      const Matrix a = RandomSymmetric(m, rng);
      EXPECT_EQ(*Devectorize(*Vectorize(a)), a);
      Vector v(PackedSize(m));
      for (int k = 0; k < v.size(); ++k) v[k] = u(rng);
      EXPECT_EQ(*Vectorize(*Devectorize(v)), v);
    }
  }
}

TEST(DimensionTest, RecoversM) {
  for (int m = 1; m <= 20; ++m) {
    EXPECT_EQ(*DimensionFromPackedSize(m * (m + 1) / 2), m);
  }
  EXPECT_FALSE(DimensionFromPackedSize(4).ok());
  EXPECT_FALSE(DimensionFromPackedSize(0).ok());
}

TEST(ThetaTest, PackAndUnpack) {
  Matrix a(1, 1);
  a << 2;
  auto cost = QuadraticCost::Create(a, (Vector(1) << 3).finished());
  ASSERT_TRUE(cost.ok());
  EXPECT_EQ(PackTheta(*cost).values(), (Vector(2) << 2, 3).finished());

  Matrix a2(2, 2);
  a2 << 1, 2, 2, 3;
  auto cost2 = QuadraticCost::Create(a2, (Vector(2) << 4, 5).finished());
  EXPECT_EQ(PackTheta(*cost2).values(),
            (Vector(5) << 1, 2, 3, 4, 5).finished());
  auto unpacked = UnpackTheta((Vector(5) << 1, 2, 3, 4, 5).finished(), 2);
  ASSERT_TRUE(unpacked.ok());
  EXPECT_EQ(unpacked->first, a2);
  EXPECT_EQ(unpacked->second, (Vector(2) << 4, 5).finished());
  EXPECT_FALSE(UnpackTheta(Vector::Zero(4), 2).ok());
}

TEST(GradientTest, SimpleCases) {
  auto identity = QuadraticCost::Create(Matrix::Identity(2, 2), Vector::Zero(2));
  EXPECT_EQ(*Gradient(*identity, (Vector(2) << 1, 2).finished()),
            (Vector(2) << 1, 2).finished());
  Rng rng(3);
  GlobalProblem p = RandomProblem(1, 3, rng);
  const QuadraticCost& cost = p.costs()[0];
  EXPECT_EQ(*Gradient(cost, Vector::Zero(3)), cost.b());
  EXPECT_FALSE(Gradient(cost, Vector::Zero(2)).ok());
}

TEST(GradientTest, MatchesCentralFiniteDifferences) {
  Rng rng(4);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    GlobalProblem p = RandomProblem(1, 4, rng);
    const QuadraticCost& cost = p.costs()[0];
    Vector x(4);
    for (int k = 0; k < 4; ++k) x[k] = z(rng);
    const Vector g = *Gradient(cost, x);
    const double h = 1e-5;
    for (int k = 0; k < 4; ++k) {
      Vector up = x, down = x;
      up[k] += h;
      down[k] -= h;
      const double fd = (cost.Evaluate(up) - cost.Evaluate(down)) / (2 * h);
      EXPECT_NEAR(fd, g[k], 1e-6);
    }
  }
}

TEST(GlobalProblemTest, ExactSolutionSmallCases) {
  auto c = QuadraticCost::Create(Matrix::Identity(3, 3), Vector::Zero(3));
  auto p = GlobalProblem::Create({*c});
  ASSERT_TRUE(p.ok());
  EXPECT_EQ(ExactSolution(*p), Vector::Zero(3));

  Vector b(2);
  b << 1, 0;
  auto c1 = QuadraticCost::Create(Matrix::Identity(2, 2), b);
  auto p2 = GlobalProblem::Create({*c1, *c1});
  const Vector x = ExactSolution(*p2);
  EXPECT_NEAR(x[0], -1.0, 1e-15);
  EXPECT_NEAR(x[1], 0.0, 1e-15);
}

TEST(GlobalProblemTest, ExactSolutionAgreesWithLuOracle) {
  Rng rng(5);
  GlobalProblem p = RandomProblem(10, 3, rng);
  Matrix a = Matrix::Zero(3, 3);
  Vector b = Vector::Zero(3);
  for (const QuadraticCost& c : p.costs()) {
    a += c.a();
    b += c.b();
  }
  const Vector oracle = -a.partialPivLu().solve(b);
  const Vector x = ExactSolution(p);
  EXPECT_LE((x - oracle).norm(), 1e-9);
  EXPECT_LE((a * x + b).norm(), 1e-9);
}

TEST(GlobalProblemTest, RejectsIndefiniteSum) {
  Matrix a(2, 2);
  a << 1, 0, 0, -1;
  auto c = QuadraticCost::Create(a, Vector::Zero(2));
  auto p = GlobalProblem::Create({*c, *c});
  EXPECT_FALSE(p.ok());
  EXPECT_TRUE(absl::IsFailedPrecondition(p.status()));
}

TEST(GlobalProblemTest, RejectsMixedDimensions) {
  auto c2 = QuadraticCost::Create(Matrix::Identity(2, 2), Vector::Zero(2));
  auto c3 = QuadraticCost::Create(Matrix::Identity(3, 3), Vector::Zero(3));
  EXPECT_FALSE(GlobalProblem::Create({*c2, *c3}).ok());
  EXPECT_FALSE(GlobalProblem::Create({}).ok());
}

TEST(RandomProblemTest, HitsNormalizationTargets) {
  Rng rng(6);
  RandomProblemOptions options;
  options.lambda_target = 60.0;
  options.b_norm_target = 60.0;
  GlobalProblem p = RandomProblem(10, 3, rng, options);
  EXPECT_NEAR(p.lambda_min(), 60.0, 1e-9);
  EXPECT_NEAR(p.b_sum().norm(), 60.0, 1e-9);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(p.a_sum());
  EXPECT_NEAR(eig.eigenvalues()[0], 60.0, 1e-9);
}

TEST(RandomProblemTest, DeterministicUnderSeed) {
  Rng a(7), b(7);
  EXPECT_EQ(FormatProblem(RandomProblem(5, 3, a)),
            FormatProblem(RandomProblem(5, 3, b)));
}

TEST(ProblemFormatTest, RoundTripIsExact) {
  Rng rng(8);
  GlobalProblem p = RandomProblem(4, 3, rng);
  auto parsed = ParseProblem(FormatProblem(p));
  ASSERT_TRUE(parsed.ok()) << parsed.status();
  ASSERT_EQ(parsed->num_agents(), 4);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(parsed->costs()[i].packed_a(), p.costs()[i].packed_a());
    EXPECT_EQ(parsed->costs()[i].b(), p.costs()[i].b());
  }
  EXPECT_FALSE(ParseProblem("3 2\n1 2\n").ok());
}

}  // namespace
}  // namespace dpls
