#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "otrm/measures.hpp"
#include "otrm/stats_types.hpp"

namespace otrm {

// Dimension-dependent mean-rate bound for E[W2^2(mu_n, mu)]:
// n^{-1/2} for d <= 3; n^{-1/2} log(1+n) for d = 4; n^{-2/d} for d >= 5.
double fg_rate(int n, int d);

// Mixing-adjusted rate r(n / C_alpha(n), d). Stated for d >= 5; smaller d
// requires the explicit extrapolate flag (no theory backs it there).
double adjusted_rate(int n, int d, const mixing_spec& mix, bool extrapolate = false);

// Ordinary least squares on (log n, log mean); CI from the t-quantile times
// the residual standard error of the slope. Requires >= 3 rows, means > 0.
fit_result fit_loglog(const std::vector<rate_row>& rows);

// Empirical-measure convergence: for each n, Monte-Carlo mean of
// W2^2(mu_n(omega), mu_ref) over k replications, sampler chosen per mix
// (iid, or the stationary Gaussian AR(1) chain for geometric mixing).
// d = 1 uses a fixed dense quantile-grid reference (16x the largest n);
// d >= 2 uses a resolution-matched stratified reference per n, whose floor
// scales with the signal and leaves the fitted slope unbiased (a fixed
// affordable dense reference would flatten it). The measured floor is
// reported in the fit.
rate_fit rate_experiment(const base_distribution& base, const std::vector<int>& ns, int k,
                         const mixing_spec& mix, std::uint64_t seed, int workers = 1);

// Deviation bound coverage: epsilon_n(delta) = bias_n + K sqrt(2 log(1/delta)/n)
// with bias_n a Monte-Carlo estimate of E[W2(mu_n, mu)] from an independent
// replication set; coverage = fraction of k replications with
// W2(mu_n, mu_ref) <= epsilon_n.
concentration_report concentration_experiment(const base_distribution& base, int n,
                                              double delta, int k, std::uint64_t seed,
                                              int workers = 1);

struct bandwidth_rule {
    double c = 1.0;          // sigma(n) = c * n^{-1/2} when decay is true
    bool decay = true;       // false: constant sigma = c for every n
};

// Mollified-empirical convergence: for each n, Monte-Carlo mean of
// W2^2(mollified mu_n, mollified reference) with both sides resampled at
// resolution n through mollify_sample.
rate_fit mollification_experiment(const base_distribution& base, const std::vector<int>& ns,
                                  const bandwidth_rule& bw, int k, std::uint64_t seed,
                                  int workers = 1);

struct clt_row {
    int n = 0;
    int m = 0;
    double rescaled_var = 0.0;  // nm/(n+m) * Var[W2^2(mu_n, nu_m)]
    double std_err = 0.0;
};

// Two-sample variance stabilization: sample variance of W2^2(mu_n, nu_m)
// over k replications, rescaled by nm/(n+m).
std::vector<clt_row> clt_variance_experiment(const base_distribution& base_mu,
                                             const base_distribution& base_nu,
                                             const std::vector<std::pair<int, int>>& pairs,
                                             int k, std::uint64_t seed, int workers = 1);

}  // namespace otrm
