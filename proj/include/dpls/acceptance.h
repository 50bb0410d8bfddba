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

#ifndef DPLS_ACCEPTANCE_H_
#define DPLS_ACCEPTANCE_H_

#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace dpls {

struct CriterionResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct Criterion {
  std::string name;
  std::function<CriterionResult()> run;
};

// Every end-to-end acceptance check, in a fixed order.
std::vector<Criterion> AcceptanceCriteria();

// Runs the criteria whose name contains `filter` (all when empty), printing
// one PASS/FAIL line per criterion as it finishes.
std::vector<CriterionResult> RunAcceptance(std::ostream& out,
                                           const std::string& filter = "");

std::string FormatResult(const CriterionResult& result);

}  // namespace dpls

#endif  // DPLS_ACCEPTANCE_H_
