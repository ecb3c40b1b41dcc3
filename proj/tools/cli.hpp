#pragma once

#include "ctxauth/metrics/metrics.hpp"
#include "ctxauth/scenario/runner.hpp"

#include <iosfwd>

namespace ctxauth::cli {

enum ExitCode { kOk = 0, kViolation = 1, kUsage = 2 };

struct Evaluation {
    scenario::RunResult run;
    metrics::Summary summary;
};

Evaluation evaluate(const scenario::Scenario& sc);

// kViolation when the run broke an invariant or could not be analysed.
int exit_code(const metrics::Summary& summary);

struct Comparison {
    std::string table;  // one row per mode
    std::uint64_t violations = 0;
};

// Runs the scenario under static, quasi and dynamic authorization.
Comparison compare_modes(const scenario::Scenario& sc);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace ctxauth::cli
