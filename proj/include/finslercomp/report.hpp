// Outcome of one theorem or structure check.
#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace finslercomp {

struct ReportParams {
    double N = std::numeric_limits<double>::quiet_NaN();  // +-inf allowed
    double eps = std::numeric_limits<double>::quiet_NaN();
    double K = std::numeric_limits<double>::quiet_NaN();
    double a = std::numeric_limits<double>::quiet_NaN();
    double b = std::numeric_limits<double>::quiet_NaN();
    double c = std::numeric_limits<double>::quiet_NaN();
};

struct CheckReport {
    std::string name;
    std::string scenario;
    std::optional<ReportParams> params;
    std::vector<double> grid;
    std::vector<double> residuals;
    double max_violation = 0.0;  // max over residuals of the signed excess (or abs error)
    double tolerance = 0.0;
    bool pass = true;
    std::map<std::string, double> values;  // named scalar diagnostics
    std::vector<std::string> notes;

    // Recompute the verdict from max_violation and tolerance.
    void finalize() { pass = std::isfinite(max_violation) && max_violation <= tolerance; }
    void add(double t, double r) {
        grid.push_back(t);
        residuals.push_back(r);
        if (!(r <= max_violation)) max_violation = r;  // NaN propagates as a failure
    }
};

}  // namespace finslercomp
