#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace modnav::checks {

struct CheckResult {
  std::string name;
  bool pass = false;
  double worst = 0.0;  // worst relative error (gradients) or deviation
  std::string detail;
};

// Central finite differences (double precision, step 1e-5) against the tape
// gradients for every primitive and for each full policy unrolled 3 steps.
// Tolerance: 1e-4 relative with a 1e-6 absolute floor.
std::vector<CheckResult> gradient_checks(uint64_t seed);

// Reward from the simulator vs an independent scalar reimplementation of the
// step and reward rules on 1000 random state/action pairs (1e-9), plus the
// per-step heading-change bound.
std::vector<CheckResult> env_checks(uint64_t seed);

bool all_pass(const std::vector<CheckResult>& results);
std::string render_report(const std::vector<CheckResult>& results);

}  // namespace modnav::checks
