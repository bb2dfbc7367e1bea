#include <cstdio>
#include <exception>

#include "volterra/suite.hpp"

int main() {
  try {
    const auto results = volterra::run_suite();
    bool all = true;
    for (const auto& r : results) {
      std::printf("%s\n", volterra::format_summary_line(r).c_str());
      all = all && r.pass;
    }
    std::printf("\n%s", volterra::format_report(results).c_str());
    return all ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance: %s\n", e.what());
    return 2;
  }
}
