// One PASS/FAIL line per acceptance criterion, with evidence under failures.
// Exit status is the number of failed criteria.

#include <iostream>

#include "sbc/validation.hpp"

int main() {
  const auto results = sbc::run_validation(sbc::ValidationOptions{}, &std::cout, false);
  int failed = 0;
  for (const auto& r : results) failed += r.pass ? 0 : 1;
  std::cout << (results.size() - failed) << " of " << results.size() << " criteria passed\n";
  return failed;
}
