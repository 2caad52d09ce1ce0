// Acceptance criteria 1-10, one line each.
//
// Exit status is nonzero when a criterion fails, except for those listed in
// kDocumented: they are evaluated at the pinned tolerance and reported as
// FAIL, but a failure there is the expected outcome (see README).

#include <iostream>
#include <set>

#include "jflow/parallel.hpp"
#include "jflow/verify.hpp"

namespace {
const std::set<int> kDocumented = {6};
}

int main() {
  jflow::tune_allocator();
  jflow::VerifyOptions options;
  options.log = &std::cerr;
  const auto results = jflow::run_verify(options);

  int passed = 0, unexpected = 0;
  for (const auto& r : results) {
    std::cout << "criterion " << r.id << " " << r.name << ": " << (r.passed ? "PASS" : "FAIL");
    if (!r.passed && kDocumented.count(r.id)) std::cout << " (documented deviation)";
    std::cout << " | " << r.detail << " [" << r.seconds << " s]\n";
    if (r.passed)
      ++passed;
    else if (!kDocumented.count(r.id))
      ++unexpected;
  }
  std::cout << passed << "/" << results.size() << " criteria pass";
  if (unexpected) std::cout << ", " << unexpected << " unexpected failure(s)";
  std::cout << "\n";
  return unexpected == 0 ? 0 : 1;
}
