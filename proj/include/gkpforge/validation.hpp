#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace gkpforge {

enum class Tier { kDefault, kExtended };

struct CheckResult {
  int criterion = 0;
  std::string name;
  bool passed = false;
  /// Informational lines that do not count towards pass/fail.
  bool diagnostic = false;
  std::string measured;
  std::string expected;
  double seconds = 0.0;
  std::vector<std::string> details;
};

struct ValidationOptions {
  Tier tier = Tier::kDefault;
  /// Fault injection: named offsets added to one side of a comparison so the
  /// matching check must fail. Keys are listed by fault_names().
  std::map<std::string, double> faults;
  /// Restrict to these criteria (empty runs all 1..14).
  std::vector<int> only;
  /// Called after each finished check.
  std::function<void(const CheckResult&)> on_result;
};

std::vector<std::string> fault_names();

/// Acceptance criteria 1..14. Each criterion yields one non-diagnostic
/// result; some add diagnostic lines.
std::vector<CheckResult> run_validation(const ValidationOptions& options = {});

/// "PASS  [ 1] name: measured (expected)" style line.
std::string format_result(const CheckResult& r);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace gkpforge
