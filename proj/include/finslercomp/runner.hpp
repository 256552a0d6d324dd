// Scenario execution: runs the requested checks in order, assembles the JSON
// report, writes CSV profiles and maps outcomes to exit codes.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "finslercomp/report_io.hpp"
#include "finslercomp/scenario.hpp"

namespace finslercomp {

enum ExitCode { exit_pass = 0, exit_check_failed = 1, exit_hypothesis = 2, exit_numerical = 3 };

struct RunOptions {
    std::string out_dir;                 // empty: nothing written
    std::optional<double> tol;           // overrides every check tolerance
    std::optional<std::uint64_t> seed;   // overrides the scenario seed
};

struct CheckOutcome {
    std::string name;
    std::string status;  // pass | fail | hypothesis_rejected | numerical_error
    std::string error;
    CheckReport report;
    std::vector<std::pair<std::string, std::string>> csv;  // file suffix, contents
};

struct RunResult {
    int exit_code = exit_pass;
    std::vector<CheckOutcome> outcomes;
    ojson report;
};

// Precedence: numerical failure (3) over hypothesis rejection (2) over check failure (1).
int combine_exit_codes(const std::vector<CheckOutcome>& outcomes);

RunResult run_scenario(const Scenario& sc, const RunOptions& opt = {});
// Runs one check of a scenario (used by the CLI `check` command and the bindings).
CheckOutcome run_check(const Scenario& sc, const CheckSpec& check, const RunOptions& opt = {});

}  // namespace finslercomp
