#include "otrm/l2w.hpp"

#include <cmath>
#include <vector>

#include "otrm/errors.hpp"
#include "otrm/ot.hpp"
#include "otrm/parallel.hpp"

namespace otrm {

namespace {

// Mean and standard error of a vector of per-realization values. The sum is
// accumulated serially in index order so the result does not depend on the
// worker count that produced the slots.
void reduce_mean(const std::vector<double>& vals, double& mean, double& std_err) {
    const int k = static_cast<int>(vals.size());
    double sum = 0.0;
    for (double v : vals) sum += v;
    mean = sum / static_cast<double>(k);
    if (k < 2) {
        std_err = 0.0;
        return;
    }
    double ss = 0.0;
    for (double v : vals) ss += (v - mean) * (v - mean);
    const double var = ss / static_cast<double>(k - 1);
    std_err = std::sqrt(var / static_cast<double>(k));
}

}  // namespace

l2w_estimate estimate_d(const random_measure_sampler& a, const random_measure_sampler& b,
                        int k, std::uint64_t seed, int workers) {
    if (k < 1) throw config_error("estimate_d: k must be >= 1");
    if (a.dim() != b.dim()) throw config_error("estimate_d: samplers have different dimensions");
    std::vector<double> vals(static_cast<size_t>(k));
    parallel_for_safe(k, workers, [&](int idx) {
        const int omega = idx + 1;
        discrete_measure mu = a.realize(seed, omega);
        discrete_measure nu = b.realize(seed, omega);
        vals[static_cast<size_t>(idx)] = w2sq(mu, nu);
    });
    l2w_estimate est;
    est.k_realizations = k;
    reduce_mean(vals, est.mean_w2_sq, est.std_err);
    if (est.mean_w2_sq < 0.0) est.mean_w2_sq = 0.0;
    est.d_value = std::sqrt(est.mean_w2_sq);
    return est;
}

energy_estimate second_energy(const random_measure_sampler& a, int k, std::uint64_t seed,
                              int workers) {
    if (k < 1) throw config_error("second_energy: k must be >= 1");
    std::vector<double> vals(static_cast<size_t>(k));
    parallel_for_safe(k, workers, [&](int idx) {
        const int omega = idx + 1;
        discrete_measure mu = a.realize(seed, omega);
        vals[static_cast<size_t>(idx)] = second_moment(mu);
    });
    energy_estimate est;
    est.k = k;
    reduce_mean(vals, est.mean, est.std_err);
    return est;
}

double markov_ball(const l2w_estimate& est, double eps) {
    if (!(eps > 0.0)) throw config_error("markov_ball: eps must be positive");
    const double bound = est.mean_w2_sq / (eps * eps);
    return bound < 1.0 ? bound : 1.0;
}

}  // namespace otrm
