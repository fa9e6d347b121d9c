#pragma once

#include <string>
#include <vector>

namespace gdl {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Module invariant suites: potentials, flatness, carleson, pde, or all. `quick` trims sample counts.
/// Throws Errc::validation for an unknown suite name.
std::vector<CheckResult> run_suite(const std::string& suite, bool quick);

}  // namespace gdl
