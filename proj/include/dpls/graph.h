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

#ifndef DPLS_GRAPH_H_
#define DPLS_GRAPH_H_

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/statusor.h"

namespace dpls {

struct Edge {
  int i;
  int j;
  double weight;
};

struct Neighbor {
  int agent;
  double weight;
};

// Undirected, connected, weighted communication graph with Laplacian L,
// (L)_ij = -w_ij and (L)_ii = sum_k w_ik < 1.
class Network {
 public:
  // Edges are unordered pairs with weights in (0, 1); duplicates, self loops,
  // disconnected graphs and weighted degrees >= 1 are rejected.
  static absl::StatusOr<Network> Create(int n, std::vector<Edge> edges);

  int size() const { return n_; }
  // Sorted by (min(i,j), max(i,j)), stored with i < j.
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Neighbor>& neighbors(int i) const { return adjacency_[i]; }
  const Eigen::MatrixXd& laplacian() const { return laplacian_; }
  // Ascending; eigenvalues()[0] == 0 up to round-off.
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  int max_degree() const;

 private:
  Network() = default;

  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<Neighbor>> adjacency_;
  Eigen::MatrixXd laplacian_;
  Eigen::VectorXd eigenvalues_;
};

// Cycle on n >= 3 vertices, every edge weighted w in (0, 0.5).
absl::StatusOr<Network> BuildCycle(int n, double w);

// max{|1 - lambda_2(L)|, |1 - lambda_n(L)|}, the per-round contraction of
// average consensus. Requires n >= 3.
absl::StatusOr<double> ConsensusRate(const Network& net);

// "n" followed by one "i j w_ij" line per edge, 0-based.
std::string FormatNetwork(const Network& net);
absl::StatusOr<Network> ParseNetwork(std::string_view text);

}  // namespace dpls

#endif  // DPLS_GRAPH_H_
