// Acceptance suite: one PASS/FAIL line per criterion, exit 0 iff all pass.
// Usage: magfiber-acceptance [--jobs N] [criterion ...]

#include <cstdlib>
#include <iostream>
#include <string>

#include "magfiber/acceptance.hpp"

int main(int argc, char** argv) {
  magfiber::AcceptanceOptions opts;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--jobs" && i + 1 < argc) {
      opts.jobs = std::atoi(argv[++i]);
    } else if (!arg.empty() && arg.find_first_not_of("0123456789") == std::string::npos) {
      opts.only.push_back(std::stoi(arg));
    } else {
      std::cerr << "usage: magfiber-acceptance [--jobs N] [criterion ...]\n";
      return 64;
    }
  }
  opts.on_result = [](const magfiber::CriterionResult& r) { std::cout << magfiber::format_result(r) << std::endl; };
  const auto results = magfiber::run_acceptance(opts);
  int failed = 0;
  for (const auto& r : results) failed += r.pass ? 0 : 1;
  std::cout << (failed ? "FAIL" : "PASS") << " acceptance: " << results.size() - failed << "/" << results.size()
            << " criteria passed" << std::endl;
  return failed ? 2 : 0;
}
