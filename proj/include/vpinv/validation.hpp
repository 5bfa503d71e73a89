#pragma once

#include <string>
#include <vector>

#include "vpinv/config.hpp"

namespace vpinv {

struct CheckResult {
    std::string module;
    std::string name;
    bool passed{false};
    double value{0.0};
    double limit{0.0};
    std::string detail;
};

/*!
 * Runs the invariant suite of every module at desk-check sizes. Uses the
 * config's seed (random probe points), c0, c0p and n_v; grid sizes are
 * fixed small values so the suite finishes in about a minute.
 */
std::vector<CheckResult> run_validation(const ExperimentConfig& config);

/// module,name,passed,value,limit,detail
std::string validation_csv(const std::vector<CheckResult>& results, const std::string& hash);

}  // namespace vpinv
