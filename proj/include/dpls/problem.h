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

// Quadratic local costs f_i(x) = 1/2 x'A_i x + B_i'x + C_i, the packing of
// (A_i, B_i) into the sensitive vector theta_i, and the exact global
// least-squares solution used as ground truth everywhere else.

#ifndef DPLS_PROBLEM_H_
#define DPLS_PROBLEM_H_

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/statusor.h"
#include "dpls/random.h"

namespace dpls {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Length of the packed upper triangle of an m x m matrix.
constexpr int PackedSize(int m) { return m * (m + 1) / 2; }
// Length of theta_i = [packed A_i; B_i].
constexpr int ThetaSize(int m) { return m * (m + 3) / 2; }

// Recovers m from a packed length m(m+1)/2.
absl::StatusOr<int> DimensionFromPackedSize(int length);

// Packs the upper triangle row by row: entry (p, q), q >= p (1-based), lands
// at position (2m - p + 2)(p - 1)/2 + q - (p - 1).
absl::StatusOr<Vector> Vectorize(const Matrix& a);
absl::StatusOr<Matrix> Devectorize(const Vector& packed);

class QuadraticCost {
 public:
  // `a` must be square and exactly symmetric.
  static absl::StatusOr<QuadraticCost> Create(const Matrix& a, Vector b,
                                              double c = 0.0);
  static absl::StatusOr<QuadraticCost> FromPacked(Vector packed_a, Vector b,
                                                  double c = 0.0);

  int dim() const { return static_cast<int>(b_.size()); }
  const Vector& packed_a() const { return packed_a_; }
  Matrix a() const;
  const Vector& b() const { return b_; }
  double c() const { return c_; }

  double Evaluate(const Vector& x) const;

 private:
  QuadraticCost(Vector packed_a, Vector b, double c)
      : packed_a_(std::move(packed_a)), b_(std::move(b)), c_(c) {}

  Vector packed_a_;
  Vector b_;
  double c_;
};

// theta_i = [F(A_i); B_i]. C_i never enters it.
class SensitiveVector {
 public:
  static absl::StatusOr<SensitiveVector> Create(Vector theta, int m);

  int dim() const { return m_; }
  const Vector& values() const { return theta_; }
  Vector packed_a() const { return theta_.head(PackedSize(m_)); }
  Vector b() const { return theta_.tail(m_); }

 private:
  SensitiveVector(Vector theta, int m) : theta_(std::move(theta)), m_(m) {}

  Vector theta_;
  int m_;
};

SensitiveVector PackTheta(const QuadraticCost& cost);
absl::StatusOr<std::pair<Matrix, Vector>> UnpackTheta(const Vector& theta,
                                                      int m);

// grad f_i(x) = A_i x + B_i.
absl::StatusOr<Vector> Gradient(const QuadraticCost& cost, const Vector& x);

class GlobalProblem {
 public:
  // Fails unless A = sum_i A_i is positive definite, with "positive" meaning
  // lambda_min(A) > 1e-9 * ||A||.
  static absl::StatusOr<GlobalProblem> Create(std::vector<QuadraticCost> costs);

  int num_agents() const { return static_cast<int>(costs_.size()); }
  int dim() const { return a_sum_.rows(); }
  const std::vector<QuadraticCost>& costs() const { return costs_; }
  const Matrix& a_sum() const { return a_sum_; }
  const Vector& b_sum() const { return b_sum_; }
  double lambda_min() const { return lambda_min_; }

 private:
  GlobalProblem(std::vector<QuadraticCost> costs, Matrix a_sum, Vector b_sum,
                double lambda_min)
      : costs_(std::move(costs)),
        a_sum_(std::move(a_sum)),
        b_sum_(std::move(b_sum)),
        lambda_min_(lambda_min) {}

  std::vector<QuadraticCost> costs_;
  Matrix a_sum_;
  Vector b_sum_;
  double lambda_min_;
};

// x* = -A^{-1} B.
Vector ExactSolution(const GlobalProblem& problem);

struct RandomProblemOptions {
  // A_i = M M'/m + diag_shift * I with M uniform on [-1, 1]^{m x m}.
  double diag_shift = 0.1;
  // When set, every A_i is rescaled by one common factor so that
  // lambda_min(sum A_i) equals this value.
  std::optional<double> lambda_target;
  // When set, every B_i is rescaled by one common factor so that
  // ||sum B_i|| equals this value.
  std::optional<double> b_norm_target;
};

// B_i uniform on [-1, 1]^m. Redraws the whole instance if A is not positive
// definite.
GlobalProblem RandomProblem(int n, int m, Rng& rng,
                            const RandomProblemOptions& options = {});

// Text fixture: "m n", then per agent a line with the packed A_i and a line
// with B_i. C_i is not stored and parses as 0.
std::string FormatProblem(const GlobalProblem& problem);
absl::StatusOr<GlobalProblem> ParseProblem(std::string_view text);

}  // namespace dpls

#endif  // DPLS_PROBLEM_H_
