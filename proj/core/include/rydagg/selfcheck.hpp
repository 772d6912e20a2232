#pragma once

#include <string>
#include <vector>

namespace rydagg {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Built-in oracle suite behind `rydagg check`: finite-difference forces and
/// couplings, dimer analytics and energy drift. Seeded, so results repeat.
std::vector<CheckResult> run_self_checks(unsigned seed = 7);

}  // namespace rydagg
