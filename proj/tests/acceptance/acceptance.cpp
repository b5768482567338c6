// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "levyx/validation.hpp"

namespace {

struct Criterion {
  const char* suite;
  const char* title;
  double budget_seconds;
};

const std::vector<Criterion> kCriteria = {
    {"lemma1", "normal probability contour identity, N = 1..3", 120},
    {"gaussian", "Fourier engine vs Gaussian closed forms", 600},
    {"parity", "compound put-call parity", 120},
    {"mc", "Monte Carlo cross-validation", 900},
    {"offsets", "contour offset invariance", 60},
    {"limits", "degenerate contract limits", 600},
    {"asian-limit", "continuous Asian limit", 600},
    {"emm", "martingale condition and model sanity", 60},
    {"linearity", "forward-start linearity in spot", 60},
};

}  // namespace

int main(int argc, char** argv) {
  // optional filter: only run the named suites
  std::vector<std::string> only(argv + 1, argv + argc);
  int failed = 0, index = 0;
  for (const auto& c : kCriteria) {
    ++index;
    if (!only.empty() && std::find(only.begin(), only.end(), c.suite) == only.end()) continue;
    levyx::SuiteReport r = levyx::run_suite(c.suite);
    bool in_time = r.seconds < c.budget_seconds;
    bool pass = r.ok() && in_time;
    if (!pass) ++failed;
    std::printf("%s [%d] %s (%s): %d/%d cases, max_violation=%.3g, %.1fs%s\n",
                pass ? "PASS" : "FAIL", index, c.title, c.suite, r.passed, r.cases,
                r.max_violation, r.seconds, in_time ? "" : " over time budget");
    if (!r.first_failure.is_null())
      std::printf("    first failing case: %s\n", r.first_failure.dump().c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
