#pragma once

#include <string>
#include <vector>

namespace volterra {

/// One measured quantity against its acceptance bound.
struct Check {
  std::string name;
  double value = 0.0;
  double target = 0.0;  ///< expected value, or the bound for one-sided checks
  double tolerance = 0.0;
  std::string relation;  ///< "abs", "rel", "<=", ">=", "info"
  bool pass = true;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = true;
  std::vector<Check> checks;
  std::string note;
  double seconds = 0.0;
};

struct SuiteOptions {
  /// Tolerance factor of the Lambert identity check (criterion 1).
  double lambert_tol = 1e-12;
  /// Criteria to run; empty runs 1..9.
  std::vector<int> only;
};

inline constexpr int criterion_count = 9;

/// Runs criterion `id` (1..9). Numerical failures inside a criterion are
/// reported as failed checks, not thrown.
CriterionResult run_criterion(int id, const SuiteOptions& options = {});
std::vector<CriterionResult> run_suite(const SuiteOptions& options = {});

/// One line per criterion: "criterion N PASS|FAIL title (details)".
std::string format_summary_line(const CriterionResult& r);
/// Multi-line table with every check.
std::string format_report(const std::vector<CriterionResult>& results);

}  // namespace volterra
