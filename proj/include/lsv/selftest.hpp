#pragma once

#include <string>
#include <vector>

namespace lsv {

/// Outcome of one invariant suite. `worst` is the largest error / tolerance
/// ratio seen, so values above 1 are failures.
struct SuiteResult {
    std::string name;
    int checks = 0;
    int failures = 0;
    double worst = 0.0;
    double seconds = 0.0;
    std::vector<std::string> messages;  // first few failures
    bool passed() const noexcept { return checks > 0 && failures == 0; }
};

struct SelftestReport {
    std::vector<SuiteResult> suites;
    bool passed() const noexcept;
};

/// Suite names in run order.
const std::vector<std::string>& selftest_suites();
/// Throws InvalidArgument for an unknown name.
SuiteResult run_suite(const std::string& name);
/// Runs the named suites, or all of them when `names` is empty.
SelftestReport selftest(const std::vector<std::string>& names = {});

}  // namespace lsv
