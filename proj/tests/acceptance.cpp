// Prints one PASS/FAIL line per acceptance criterion; exits nonzero on any FAIL.

#include <chrono>
#include <cstdio>

#include "sdm/acceptance.hpp"

int main() {
  int failed = 0;
  for (const auto& s : sdm::acceptance_scenarios()) {
    const auto start = std::chrono::steady_clock::now();
    const auto r = sdm::run_scenario(s);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%2d] %s (%.2fs)\n", r.criterion, r.line().c_str(), secs);
    std::fflush(stdout);
    failed += !r.passed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(sdm::acceptance_scenarios().size()) - failed,
              sdm::acceptance_scenarios().size());
  return failed == 0 ? 0 : 1;
}
