#pragma once

#include <vector>

namespace otrm {

struct rate_row {
    int n = 0;
    double mean = 0.0;
    double std_err = 0.0;
};

struct rate_fit {
    std::vector<rate_row> rows;
    double slope = 0.0;
    double intercept = 0.0;
    double slope_ci_lo = 0.0;
    double slope_ci_hi = 0.0;
    // Resolution floor of the reference discretization (W2^2 between two
    // independent references at the finest tested size), reported with
    // every fit; 0 when the reference is an exact deterministic grid.
    double floor = 0.0;
};

struct concentration_report {
    double delta = 0.0;
    double epsilon_n = 0.0;
    double bias_n = 0.0;
    double coverage = 0.0;   // fraction of replications with W2 <= epsilon_n
    int k = 0;
    double sub_gaussian_k = 0.0;
};

struct fit_result {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_ci_lo = 0.0;
    double slope_ci_hi = 0.0;
};

}  // namespace otrm
