#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace levyx {

/// Outcome of one validation suite. max_violation is the largest measured
/// discrepancy in the suite's own metric (absolute, relative or a failure
/// fraction, see the suite list in the README).
struct SuiteReport {
  std::string suite;
  int cases = 0;
  int passed = 0;
  double max_violation = 0.0;
  double seconds = 0.0;
  /// Inputs and measurement of the first failing case; null when all pass.
  nlohmann::json first_failure;

  bool ok() const { return cases > 0 && passed == cases; }
  nlohmann::json to_json() const;
};

/// Suite names in run order: lemma1, gaussian, parity, mc, offsets, limits,
/// asian-limit, emm, linearity.
const std::vector<std::string>& suite_names();

/// Runs one suite by name; "all" is not accepted here. Throws
/// std::invalid_argument for unknown names.
SuiteReport run_suite(const std::string& name);

}  // namespace levyx
