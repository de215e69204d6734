#pragma once

#include <vector>

#include "otrm/measures.hpp"

namespace otrm {

// Transport plan between two discrete measures; entries (i, j, mass).
struct coupling_entry {
    int i;
    int j;
    double mass;
};

struct coupling {
    std::vector<coupling_entry> entries;
};

struct marginal_report {
    double max_row_dev = 0.0;
    double max_col_dev = 0.0;
    bool ok = false;  // both deviations <= 1e-10
};

struct transport_result {
    coupling plan;
    double cost2 = 0.0;  // optimal squared-distance transport cost
    double w2 = 0.0;     // sqrt(cost2)
    // Copies of the inputs so the result is self-contained for interpolation.
    discrete_measure source;
    discrete_measure target;
};

// Largest atom count accepted on either side of an exact solve.
inline constexpr int kMaxSolverAtoms = 5000;

// Squared distances below this are treated as exact zeros, so coincident
// atoms produce cost 0 instead of accumulated rounding noise.
inline constexpr double kCostClamp = 1e-15;

// Exact squared-Euclidean optimal transport. Equal-size uniform-weight
// inputs go through the assignment fast path (Jonker-Volgenant); everything
// else through a transportation network simplex. Never regularized.
// Throws config_error on dimension mismatch or degenerate weights and
// guard_error when either side exceeds kMaxSolverAtoms.
transport_result w2_exact(const discrete_measure& mu, const discrete_measure& nu);

// Exact 1D W2 via the monotone quantile coupling: sort atoms, integrate
// squared quantile differences over the merged weight partition.
double w2_1d(const discrete_measure& mu, const discrete_measure& nu);

// Squared W2 without materializing the coupling. Dispatches d=1 inputs to
// the closed-form quantile integration (no size guard needed there); other
// inputs use w2_exact.
double w2sq(const discrete_measure& mu, const discrete_measure& nu);

marginal_report check_coupling(const coupling& c, const discrete_measure& mu,
                               const discrete_measure& nu);

}  // namespace otrm
