#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "densops/base.hpp"

namespace densops {

// Outcome classification for a named check or suite run. "ProbablyPass" is
// reported only when a zero test had to fall back to randomized evaluation
// because the expression did not canonicalize.
enum class CheckStatus { Pass, ProbablyPass, Fail, Error };

// Stable wire names: "pass", "probably-pass", "fail", "error".
std::string status_name(CheckStatus s);

struct CheckOutcome {
    CheckStatus status = CheckStatus::Pass;
    std::string detail;          // short summary: case counts, sub-results
    std::string counterexample;  // offending case and expression on failure
};

// A named randomized verification suite. Runs are deterministic for a fixed
// seed; cases inside a suite are independent.
struct Suite {
    std::string name;     // stable kebab-case identifier
    std::string summary;  // one-line description of what is verified
    std::function<CheckOutcome(uint64_t seed)> run;
};

// All built-in suites in declaration order.
const std::vector<Suite>& builtin_suites();

// Suite with the given name, or nullptr.
const Suite* find_suite(const std::string& name);

}  // namespace densops
