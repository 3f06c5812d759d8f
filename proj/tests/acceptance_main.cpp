// Acceptance gate: runs every criterion, prints one verdict line each, and
// writes the full report to acceptance.json. Exit status is zero only when
// all criteria pass.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "scl/acceptance.hpp"

int main(int argc, char** argv) {
  std::filesystem::path out = "acceptance.json";
  if (argc > 1) {
    out = argv[1];
  } else if (const char* env = std::getenv("SCL_OUT_DIR")) {
    if (*env != '\0') {
      std::filesystem::create_directories(env);
      out = std::filesystem::path(env) / "acceptance.json";
    }
  }

  scl::AcceptanceOutcome outcome;
  try {
    outcome = scl::run_acceptance();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance run aborted: %s\n", e.what());
    return 2;
  }

  int k = 0;
  for (const auto& r : outcome.results) {
    ++k;
    std::printf("[%2d/%zu] %s  %-26s measured=%.6e tol=%.6e\n", k, outcome.results.size(),
                r.pass ? "PASS" : "FAIL", r.name.c_str(), r.measured, r.tolerance);
    if (!r.pass && !r.details.empty()) {
      std::printf("        %s\n", r.details.dump().c_str());
    }
  }

  scl::write_json(out, outcome.report);
  std::printf("%s (report: %s)\n", outcome.all_pass ? "ALL PASS" : "FAILURES PRESENT",
              out.string().c_str());
  return outcome.all_pass ? 0 : 1;
}
