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

#include <cmath>
#include <sstream>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "dpls/status_macros.h"

namespace dpls {
namespace {

// 0-based position of (p, q), q >= p, following the 1-based rule in
// Vectorize's comment.
int PackedIndex(int m, int p, int q) {
  const int p1 = p + 1;
  const int q1 = q + 1;
  return (2 * m - p1 + 2) * (p1 - 1) / 2 + q1 - (p1 - 1) - 1;
}

Matrix Unpack(const Vector& packed, int m) {
  Matrix a(m, m);
  for (int p = 0; p < m; ++p) {
    for (int q = p; q < m; ++q) {
      a(p, q) = packed[PackedIndex(m, p, q)];
      a(q, p) = a(p, q);
    }
  }
  return a;
}

double SmallestEigenvalue(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()[0];
}

}  // namespace

absl::StatusOr<int> DimensionFromPackedSize(int length) {
  if (length <= 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("packed length must be positive, got ", length));
  }
  const int m = static_cast<int>(
      std::lround((std::sqrt(8.0 * length + 1.0) - 1.0) / 2.0));
  if (PackedSize(m) != length) {
    return absl::InvalidArgumentError(absl::StrCat(
        "length ", length, " is not of the form m(m+1)/2"));
  }
  return m;
}

absl::StatusOr<Vector> Vectorize(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    return absl::InvalidArgumentError(absl::StrCat(
        "expected a non-empty square matrix, got ", a.rows(), "x", a.cols()));
  }
  if (a != a.transpose()) {
    return absl::InvalidArgumentError("matrix is not symmetric");
  }
  const int m = static_cast<int>(a.rows());
  Vector packed(PackedSize(m));
  for (int p = 0; p < m; ++p) {
    for (int q = p; q < m; ++q) packed[PackedIndex(m, p, q)] = a(p, q);
  }
  return packed;
}

absl::StatusOr<Matrix> Devectorize(const Vector& packed) {
  DPLS_ASSIGN_OR_RETURN(const int m,
                        DimensionFromPackedSize(static_cast<int>(packed.size())));
  return Unpack(packed, m);
}

absl::StatusOr<QuadraticCost> QuadraticCost::Create(const Matrix& a, Vector b,
                                                    double c) {
  DPLS_ASSIGN_OR_RETURN(Vector packed, Vectorize(a));
  return FromPacked(std::move(packed), std::move(b), c);
}

absl::StatusOr<QuadraticCost> QuadraticCost::FromPacked(Vector packed_a,
                                                        Vector b, double c) {
  DPLS_ASSIGN_OR_RETURN(const int m,
                        DimensionFromPackedSize(static_cast<int>(packed_a.size())));
  if (b.size() != m) {
    return absl::InvalidArgumentError(
        absl::StrCat("B has length ", b.size(), ", expected ", m));
  }
  if (!packed_a.allFinite() || !b.allFinite() || !std::isfinite(c)) {
    return absl::InvalidArgumentError("cost data must be finite");
  }
  return QuadraticCost(std::move(packed_a), std::move(b), c);
}

Matrix QuadraticCost::a() const { return Unpack(packed_a_, dim()); }

double QuadraticCost::Evaluate(const Vector& x) const {
  return 0.5 * x.dot(a() * x) + b_.dot(x) + c_;
}

absl::StatusOr<SensitiveVector> SensitiveVector::Create(Vector theta, int m) {
  if (m <= 0 || theta.size() != ThetaSize(m)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "theta has length ", theta.size(), ", expected m(m+3)/2 = ",
        m > 0 ? ThetaSize(m) : 0));
  }
  return SensitiveVector(std::move(theta), m);
}

SensitiveVector PackTheta(const QuadraticCost& cost) {
  const int m = cost.dim();
  Vector theta(ThetaSize(m));
  theta << cost.packed_a(), cost.b();
  return *SensitiveVector::Create(std::move(theta), m);
}

absl::StatusOr<std::pair<Matrix, Vector>> UnpackTheta(const Vector& theta,
                                                      int m) {
  if (m <= 0 || theta.size() != ThetaSize(m)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "theta has length ", theta.size(), ", which does not match m = ", m));
  }
  return std::make_pair(Unpack(theta.head(PackedSize(m)), m),
                        Vector(theta.tail(m)));
}

absl::StatusOr<Vector> Gradient(const QuadraticCost& cost, const Vector& x) {
  if (x.size() != cost.dim()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "x has length ", x.size(), ", cost has dimension ", cost.dim()));
  }
  return cost.a() * x + cost.b();
}

absl::StatusOr<GlobalProblem> GlobalProblem::Create(
    std::vector<QuadraticCost> costs) {
  if (costs.empty()) {
    return absl::InvalidArgumentError("problem needs at least one agent");
  }
  const int m = costs.front().dim();
  Matrix a_sum = Matrix::Zero(m, m);
  Vector b_sum = Vector::Zero(m);
  for (const QuadraticCost& cost : costs) {
    if (cost.dim() != m) {
      return absl::InvalidArgumentError(absl::StrCat(
          "agents disagree on dimension: ", cost.dim(), " vs ", m));
    }
    a_sum += cost.a();
    b_sum += cost.b();
  }
  const double lambda_min = SmallestEigenvalue(a_sum);
  const double scale = a_sum.norm();
  if (!(lambda_min > 1e-9 * scale) || scale == 0.0) {
    return absl::FailedPreconditionError(absl::StrCat(
        "sum of A_i is not positive definite (lambda_min = ", lambda_min,
        ", ||A|| = ", scale, ")"));
  }
  return GlobalProblem(std::move(costs), std::move(a_sum), std::move(b_sum),
                       lambda_min);
}

Vector ExactSolution(const GlobalProblem& problem) {
  return -problem.a_sum().llt().solve(problem.b_sum());
}

GlobalProblem RandomProblem(int n, int m, Rng& rng,
                            const RandomProblemOptions& options) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  while (true) {
    std::vector<Matrix> as;
    std::vector<Vector> bs;
    Matrix a_sum = Matrix::Zero(m, m);
    Vector b_sum = Vector::Zero(m);
    for (int i = 0; i < n; ++i) {
      Matrix factor(m, m);
      for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) factor(r, c) = unit(rng);
      }
      Matrix a = factor * factor.transpose() / m;
      a.diagonal().array() += options.diag_shift;
      // Exact symmetry; the product above can differ in the last bit.
      a = ((a + a.transpose()) / 2).eval();
      Vector b(m);
      for (int r = 0; r < m; ++r) b[r] = unit(rng);
      a_sum += a;
      b_sum += b;
      as.push_back(std::move(a));
      bs.push_back(std::move(b));
    }
    const double lambda_min = SmallestEigenvalue(a_sum);
    if (!(lambda_min > 1e-9 * a_sum.norm())) continue;
    const double a_scale =
        options.lambda_target ? *options.lambda_target / lambda_min : 1.0;
    double b_scale = 1.0;
    if (options.b_norm_target) {
      if (b_sum.norm() == 0.0) continue;
      b_scale = *options.b_norm_target / b_sum.norm();
    }
    std::vector<QuadraticCost> costs;
    costs.reserve(n);
    for (int i = 0; i < n; ++i) {
      costs.push_back(
          *QuadraticCost::Create(as[i] * a_scale, bs[i] * b_scale, 0.0));
    }
    auto problem = GlobalProblem::Create(std::move(costs));
    if (problem.ok()) return *std::move(problem);
  }
}

std::string FormatProblem(const GlobalProblem& problem) {
  std::string out =
      absl::StrCat(problem.dim(), " ", problem.num_agents(), "\n");
  auto append_row = [&out](const Vector& v) {
    for (int k = 0; k < v.size(); ++k) {
      absl::StrAppend(&out, k == 0 ? "" : " ", absl::StrFormat("%.17g", v[k]));
    }
    out += "\n";
  };
  for (const QuadraticCost& cost : problem.costs()) {
    append_row(cost.packed_a());
    append_row(cost.b());
  }
  return out;
}

absl::StatusOr<GlobalProblem> ParseProblem(std::string_view text) {
  std::istringstream in{std::string(text)};
  int m = 0;
  int n = 0;
  if (!(in >> m >> n) || m <= 0 || n <= 0) {
    return absl::InvalidArgumentError("problem header must be 'm n'");
  }
  std::vector<QuadraticCost> costs;
  costs.reserve(n);
  for (int i = 0; i < n; ++i) {
    Vector packed(PackedSize(m));
    Vector b(m);
    for (int k = 0; k < packed.size(); ++k) {
      if (!(in >> packed[k])) {
        return absl::InvalidArgumentError(
            absl::StrCat("agent ", i, ": truncated A row"));
      }
    }
    for (int k = 0; k < m; ++k) {
      if (!(in >> b[k])) {
        return absl::InvalidArgumentError(
            absl::StrCat("agent ", i, ": truncated B row"));
      }
    }
    DPLS_ASSIGN_OR_RETURN(QuadraticCost cost,
                          QuadraticCost::FromPacked(packed, b, 0.0));
    costs.push_back(std::move(cost));
  }
  std::string rest;
  if (in >> rest) {
    return absl::InvalidArgumentError("trailing data after last agent");
  }
  return GlobalProblem::Create(std::move(costs));
}

}  // namespace dpls
