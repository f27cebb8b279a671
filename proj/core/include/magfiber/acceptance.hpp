#pragma once

#include <functional>
#include <string>
#include <vector>

namespace magfiber {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  /// Measured quantities and the thresholds they were compared against.
  std::string detail;
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

struct AcceptanceOptions {
  /// Criteria to run (1..11); empty runs all of them.
  std::vector<int> only;
  /// Worker threads for the parameter sweep and band tables (0 = one per core).
  int jobs = 0;
  /// Called as soon as each criterion finishes.
  std::function<void(const CriterionResult&)> on_result;
};

/// Runs the acceptance criteria with their tolerances and runtime budgets
/// fixed in code. A criterion passes only when every check holds and it
/// finished within its budget.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts = {});

/// One line: "PASS [ 3] title | detail | 12.3 s / 60 s".
std::string format_result(const CriterionResult& r);

}  // namespace magfiber
