#pragma once

#include <string>
#include <vector>

namespace pirogov::verify {

// One end-to-end acceptance check: a named invariant battery with a pinned
// runtime budget. `pass` requires every internal check to hold and the wall
// time to stay under the budget.
struct CriterionResult {
  std::string id;       // suite token, e.g. "ursell"
  std::string name;     // what the battery establishes
  bool pass = false;
  double seconds = 0.0;
  double budget = 0.0;  // pinned wall-time limit, seconds
  int checks = 0;       // individual assertions evaluated
  std::string detail;   // summary numbers, or the first failing check
};

// Runs the acceptance batteries whose id equals `filter` (empty = all nine),
// in declaration order. Unknown filters come back as an empty vector.
std::vector<CriterionResult> run_acceptance(const std::string& filter = "");

}  // namespace pirogov::verify
