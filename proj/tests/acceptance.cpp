// Acceptance matrix: one PASS/FAIL line per criterion, nonzero exit on failure.
//   acceptance [output-dir] [seed]

#include <cstdio>
#include <cstdlib>
#include <string>

#include "hardy/acceptance.hpp"

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : "acceptance_out";
  const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : hardy::reference_config().seed;
  const auto results = hardy::acceptance::run_all(dir, seed, [](const auto& r) {
    std::printf("%s\n", hardy::acceptance::format_line(r).c_str());
    std::fflush(stdout);
  });
  int failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failed, results.size());
  return failed == 0 ? 0 : 1;
}
