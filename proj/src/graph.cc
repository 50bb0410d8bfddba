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

#include "dpls/graph.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <tuple>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"

namespace dpls {

absl::StatusOr<Network> Network::Create(int n, std::vector<Edge> edges) {
  if (n < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("network needs at least 2 agents, got ", n));
  }
  std::set<std::pair<int, int>> seen;
  for (Edge& e : edges) {
    if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n) {
      return absl::InvalidArgumentError(
          absl::StrCat("edge (", e.i, ",", e.j, ") out of range"));
    }
    if (e.i == e.j) {
      return absl::InvalidArgumentError(
          absl::StrCat("self loop at vertex ", e.i));
    }
    if (!(e.weight > 0.0 && e.weight < 1.0)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "edge (", e.i, ",", e.j, ") weight ", e.weight, " not in (0,1)"));
    }
    if (e.i > e.j) std::swap(e.i, e.j);
    if (!seen.insert({e.i, e.j}).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate edge (", e.i, ",", e.j, ")"));
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.i, a.j) < std::tie(b.i, b.j);
  });

  Network net;
  net.n_ = n;
  net.adjacency_.resize(n);
  net.laplacian_ = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : edges) {
    net.adjacency_[e.i].push_back({e.j, e.weight});
    net.adjacency_[e.j].push_back({e.i, e.weight});
    net.laplacian_(e.i, e.j) = -e.weight;
    net.laplacian_(e.j, e.i) = -e.weight;
    net.laplacian_(e.i, e.i) += e.weight;
    net.laplacian_(e.j, e.j) += e.weight;
  }
  for (auto& row : net.adjacency_) {
    std::sort(row.begin(), row.end(),
              [](const Neighbor& a, const Neighbor& b) {
                return a.agent < b.agent;
              });
  }
  for (int i = 0; i < n; ++i) {
    if (!(net.laplacian_(i, i) < 1.0)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "weighted degree of vertex ", i, " is ", net.laplacian_(i, i),
          ", must be < 1"));
    }
  }

  // Connectivity by breadth-first search from vertex 0.
  std::vector<bool> reached(n, false);
  std::vector<int> frontier = {0};
  reached[0] = true;
  int count = 1;
  while (!frontier.empty()) {
    const int v = frontier.back();
    frontier.pop_back();
    for (const Neighbor& nb : net.adjacency_[v]) {
      if (!reached[nb.agent]) {
        reached[nb.agent] = true;
        ++count;
        frontier.push_back(nb.agent);
      }
    }
  }
  if (count != n) {
    return absl::FailedPreconditionError(absl::StrCat(
        "network is disconnected: ", count, " of ", n, " vertices reachable"));
  }

  net.edges_ = std::move(edges);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      net.laplacian_, Eigen::EigenvaluesOnly);
  net.eigenvalues_ = solver.eigenvalues();
  return net;
}

int Network::max_degree() const {
  size_t best = 0;
  for (const auto& row : adjacency_) best = std::max(best, row.size());
  return static_cast<int>(best);
}

absl::StatusOr<Network> BuildCycle(int n, double w) {
  if (n < 3) {
    return absl::InvalidArgumentError(
        absl::StrCat("cycle needs n >= 3, got ", n));
  }
  if (!(w > 0.0 && w < 0.5)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "cycle weight ", w, " outside (0, 0.5); weighted degree 2w must be < 1"));
  }
  std::vector<Edge> edges;
  edges.reserve(n);
  for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, w});
  return Network::Create(n, std::move(edges));
}

absl::StatusOr<double> ConsensusRate(const Network& net) {
  if (net.size() < 3) {
    return absl::InvalidArgumentError(
        absl::StrCat("consensus rate needs n >= 3, got ", net.size()));
  }
  const Eigen::VectorXd& lambda = net.eigenvalues();
  const double rate = std::max(std::abs(1.0 - lambda[1]),
                               std::abs(1.0 - lambda[lambda.size() - 1]));
  if (!(rate < 1.0)) {
    return absl::FailedPreconditionError(
        "lambda_2(L) is zero; network is not connected");
  }
  return rate;
}

std::string FormatNetwork(const Network& net) {
  std::string out = absl::StrCat(net.size(), "\n");
  for (const Edge& e : net.edges()) {
    absl::StrAppend(&out, e.i, " ", e.j, " ", absl::StrFormat("%.17g", e.weight),
                    "\n");
  }
  return out;
}

absl::StatusOr<Network> ParseNetwork(std::string_view text) {
  std::istringstream in{std::string(text)};
  int n = 0;
  if (!(in >> n)) {
    return absl::InvalidArgumentError("graph header must be 'n'");
  }
  std::vector<Edge> edges;
  Edge e;
  while (in >> e.i) {
    if (!(in >> e.j >> e.weight)) {
      return absl::InvalidArgumentError("truncated edge line");
    }
    edges.push_back(e);
  }
  if (!in.eof()) {
    return absl::InvalidArgumentError("malformed edge line");
  }
  return Network::Create(n, std::move(edges));
}

}  // namespace dpls
