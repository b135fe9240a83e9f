#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mabs {

struct CheckResult {
    std::string name;
    bool pass = false;
    double measured = 0.0;   ///< worst observed deviation (check-specific units)
    double threshold = 0.0;  ///< limit the measurement must stay within
    std::string detail;
    double seconds = 0.0;  ///< wall time; excluded from machine-readable output
};

struct SuiteOptions {
    std::uint64_t seed = 42;
    /// Test-harness self-check: flips a sign inside one reference
    /// computation so the corresponding invariant must fail.
    bool inject_fault = false;
};

/// suite in {"geometry", "kernels", "pricing", "all"}; throws ConfigError on
/// anything else. Deterministic for a fixed seed.
std::vector<CheckResult> run_validation_suite(const std::string& suite, const SuiteOptions& opt);

}  // namespace mabs
