#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fon {

struct CheckResult {
  std::string name;
  std::string covers;  // theorem / equation tags the check exercises
  bool pass = false;
  std::string detail;
};

struct VerifyOptions {
  /// Replaces each check's numeric tolerance when set. Exact structural
  /// checks (symmetry, bitwise recursions) ignore it.
  std::optional<double> tol_override;
  std::uint64_t seed = 20160101;
};

/// Built-in invariant and oracle suites: composition grid oracle,
/// convergence of the three reference schemes, the combined-form price
/// identity, RLS against the batch oracle, the noiseless price contraction
/// and the manipulator recursions.
std::vector<CheckResult> run_verify(const VerifyOptions& opts = {});

}  // namespace fon
