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

// Prints one PASS/FAIL line per acceptance criterion. An optional argument
// restricts the run to criteria whose name contains it.

#include <iostream>
#include <string>

#include "dpls/acceptance.h"

int main(int argc, char** argv) {
  const std::string filter = argc > 1 ? argv[1] : "";
  const auto results = dpls::RunAcceptance(std::cout, filter);
  if (results.empty()) return 1;
  for (const auto& r : results) {
    if (!r.passed) return 1;
  }
  return 0;
}
