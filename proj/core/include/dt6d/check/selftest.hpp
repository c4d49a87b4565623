#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dt6d::check {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Gradient checks for every layer and the composed network, the euler/
/// quaternion cross-check, codec and group-law roundtrips, sampler
/// statistics, and the rasterizer-vs-raycast oracle. Deterministic for a
/// given seed; sized to finish well inside five minutes.
std::vector<CheckResult> run_selftest(uint64_t seed = 20250810);

}  // namespace dt6d::check
