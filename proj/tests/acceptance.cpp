// Prints one PASS/FAIL line per acceptance criterion; exit status 0 iff all pass.

#include <iostream>

#include "equimap/acceptance.hpp"

int main() {
  const bool ok = equimap::acceptance::run_all(equimap::acceptance::kDefaultSeed,
                                               [](const std::string& line) { std::cout << line << std::endl; });
  std::cout << (ok ? "all acceptance criteria passed" : "some acceptance criteria FAILED") << std::endl;
  return ok ? 0 : 1;
}
