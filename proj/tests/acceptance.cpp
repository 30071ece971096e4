// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. The same checks back the `verify` scenario.

#include <iostream>

#include "wtk/verify.hpp"

int main() {
  wtk::VerifyOptions opt;
  opt.threads = wtk::resolve_threads(0);
  opt.on_result = [](const wtk::CriterionResult& r) { std::cout << wtk::format_result_line(r) << std::endl; };
  const auto results = wtk::run_verify(opt);
  int failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::cout << (failed == 0 ? "ALL PASS" : std::to_string(failed) + " FAILED") << " (" << results.size()
            << " criteria)" << std::endl;
  return failed == 0 ? 0 : 1;
}
