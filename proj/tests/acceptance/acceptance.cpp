// Runs the acceptance criteria and prints one line per criterion.

#include <cstdlib>
#include <iostream>
#include <string>

#include "uhf/harness.hpp"

int main(int argc, char** argv) {
  std::uint64_t seed = 20261016;
  if (argc > 1) seed = std::stoull(argv[1]);
  int failed = 0;
  for (int id = 1; id <= uhf::harness::kCriterionCount; ++id) {
    auto r = uhf::harness::run_criterion(id, seed);
    std::cout << uhf::harness::format_criterion(r) << std::endl;
    for (const auto& n : r.notes) std::cout << n << std::endl;
    failed += r.pass ? 0 : 1;
  }
  std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
