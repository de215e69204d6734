#pragma once

#include <cstdint>

#include "otrm/measures.hpp"

namespace otrm {

struct l2w_estimate {
    double mean_w2_sq = 0.0;
    double std_err = 0.0;
    int k_realizations = 0;
    double d_value = 0.0;  // sqrt(mean_w2_sq)
};

struct energy_estimate {
    double mean = 0.0;
    double std_err = 0.0;
    int k = 0;
};

// Monte-Carlo distance between random measures over the shared probability
// space: mean over omega = 1..k of W2^2(a(seed,omega), b(seed,omega)).
// Both samplers see the same (seed, omega) — the coupling is fixed by
// construction, never optimized. Deterministic for any worker count.
l2w_estimate estimate_d(const random_measure_sampler& a, const random_measure_sampler& b,
                        int k, std::uint64_t seed, int workers = 1);

// Monte-Carlo mean of the second moment of realizations.
energy_estimate second_energy(const random_measure_sampler& a, int k, std::uint64_t seed,
                              int workers = 1);

// Markov bound on P(W2 > eps): min(1, mean_w2_sq / eps^2).
double markov_ball(const l2w_estimate& est, double eps);

}  // namespace otrm
