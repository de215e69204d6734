#include "otrm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "otrm/errors.hpp"
#include "otrm/ot.hpp"
#include "otrm/parallel.hpp"

namespace otrm {

namespace {

// Purpose tags for counter streams; distinct tags = independent randomness.
constexpr std::uint64_t kRateIidTag = 0x5254;
constexpr std::uint64_t kRateAr1Tag = 0x5255;
constexpr std::uint64_t kConcMainTag = 0x4341;
constexpr std::uint64_t kConcBiasTag = 0x4342;
constexpr std::uint64_t kMollSampleTag = 0x4d41;
constexpr std::uint64_t kMollNoiseSampleTag = 0x4d42;
constexpr std::uint64_t kMollNoiseRefTag = 0x4d43;
constexpr std::uint64_t kMollFloorTag = 0x4d46;
constexpr std::uint64_t kCltMuTag = 0x434c;
constexpr std::uint64_t kCltNuTag = 0x434d;

// Seed perturbation used to draw a second, independent reference when
// measuring the resolution floor.
constexpr std::uint64_t kFloorSeedXor = 0x9e3779b97f4a7c15ULL;

void mean_se(const std::vector<double>& vals, double& mean, double& se) {
    const int k = static_cast<int>(vals.size());
    double sum = 0.0;
    for (double v : vals) sum += v;
    mean = sum / static_cast<double>(k);
    if (k < 2) {
        se = 0.0;
        return;
    }
    double ss = 0.0;
    for (double v : vals) ss += (v - mean) * (v - mean);
    se = std::sqrt(ss / static_cast<double>(k - 1) / static_cast<double>(k));
}

double rate_real(double n_eff, int d) {
    if (d <= 3) return 1.0 / std::sqrt(n_eff);
    if (d == 4) return std::log1p(n_eff) / std::sqrt(n_eff);
    return std::pow(n_eff, -2.0 / static_cast<double>(d));
}

// Two-sided 97.5% Student-t quantiles for df = 1..30; 1.96 beyond.
double t_quantile(int df) {
    static const double table[30] = {
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
        2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
        2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
    if (df < 1) throw config_error("t_quantile: df must be >= 1");
    return df <= 30 ? table[df - 1] : 1.96;
}

void check_sizes(const std::vector<int>& ns, std::size_t minimum) {
    if (ns.size() < minimum) throw config_error("experiment: too few sample sizes");
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (ns[i] < 2) throw config_error("experiment: sample sizes must be >= 2");
        if (i > 0 && ns[i] <= ns[i - 1])
            throw config_error("experiment: sample sizes must be strictly increasing");
    }
}

// Realizes one empirical measure for the rate experiment: i.i.d. draws, or a
// stationary Gaussian AR(1) chain (rho = exp(-c)) affinely mapped onto the
// requested Gaussian base for geometric mixing.
discrete_measure rate_realization(const base_distribution& base, const mixing_spec& mix,
                                  int n, std::uint64_t seed, std::uint64_t omega) {
    if (mix.kind == mixing_spec::family::iid) {
        empirical_iid_sampler samp(base, n, kRateIidTag);
        return samp.realize(seed, omega);
    }
    const double rho = std::exp(-mix.c);
    empirical_ar1_sampler samp(rho, n, base.d, kRateAr1Tag);
    discrete_measure m = samp.realize(seed, omega);
    for (int i = 0; i < m.n(); ++i) {
        double* p = m.x.data() + static_cast<std::size_t>(i) * m.d;
        for (int c = 0; c < m.d; ++c) p[c] = base.mean[c] + base.sigma * p[c];
    }
    return m;
}

// Reference measure a size-n empirical sample is compared against. d = 1
// affords a dense exact quantile grid; d >= 2 matches the reference
// resolution to n so its own discretization error scales with the signal
// instead of flattening the fitted slope.
discrete_measure rate_reference(const base_distribution& base, int n, int n_max,
                                std::uint64_t seed) {
    if (base.d == 1) return reference_discretization(base, 16 * n_max, seed);
    return reference_discretization(base, n, seed);
}

}  // namespace

double fg_rate(int n, int d) {
    if (n < 1) throw config_error("fg_rate: n must be >= 1");
    if (d < 1) throw config_error("fg_rate: d must be >= 1");
    return rate_real(static_cast<double>(n), d);
}

double adjusted_rate(int n, int d, const mixing_spec& mix, bool extrapolate) {
    if (n < 1) throw config_error("adjusted_rate: n must be >= 1");
    if (d < 1) throw config_error("adjusted_rate: d must be >= 1");
    mix.validate();
    if (d <= 4 && !extrapolate)
        throw config_error(
            "adjusted_rate: stated for d >= 5 only; pass extrapolate=true to evaluate anyway");
    const double n_eff = static_cast<double>(n) / c_alpha(mix, n);
    if (!(n_eff > 1.0))
        throw config_error("adjusted_rate: effective sample size n / C_alpha(n) is below 1");
    return rate_real(n_eff, d);
}

fit_result fit_loglog(const std::vector<rate_row>& rows) {
    const int k = static_cast<int>(rows.size());
    if (k < 3) throw config_error("fit_loglog: need at least 3 rows");
    std::vector<double> xs(rows.size()), ys(rows.size());
    for (int i = 0; i < k; ++i) {
        if (rows[i].n < 1) throw config_error("fit_loglog: row with n < 1");
        if (!(rows[i].mean > 0.0)) throw config_error("fit_loglog: row with nonpositive mean");
        xs[i] = std::log(static_cast<double>(rows[i].n));
        ys[i] = std::log(rows[i].mean);
    }
    double xbar = 0.0, ybar = 0.0;
    for (int i = 0; i < k; ++i) {
        xbar += xs[i];
        ybar += ys[i];
    }
    xbar /= k;
    ybar /= k;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < k; ++i) {
        sxx += (xs[i] - xbar) * (xs[i] - xbar);
        sxy += (xs[i] - xbar) * (ys[i] - ybar);
    }
    if (!(sxx > 0.0)) throw config_error("fit_loglog: sample sizes are not distinct");
    fit_result f;
    f.slope = sxy / sxx;
    f.intercept = ybar - f.slope * xbar;
    double ssr = 0.0;
    for (int i = 0; i < k; ++i) {
        const double resid = ys[i] - (f.intercept + f.slope * xs[i]);
        ssr += resid * resid;
    }
    const int df = k - 2;
    const double se = std::sqrt(ssr / static_cast<double>(df) / sxx);
    const double t = t_quantile(df);
    f.slope_ci_lo = f.slope - t * se;
    f.slope_ci_hi = f.slope + t * se;
    return f;
}

rate_fit rate_experiment(const base_distribution& base, const std::vector<int>& ns, int k,
                         const mixing_spec& mix, std::uint64_t seed, int workers) {
    base.validate();
    mix.validate();
    check_sizes(ns, 3);
    if (k < 2) throw config_error("rate_experiment: need k >= 2 replications");
    if (mix.kind == mixing_spec::family::polynomial)
        throw config_error(
            "rate_experiment: no sample-path generator realizes polynomial mixing; "
            "use iid or geometric");
    if (mix.kind == mixing_spec::family::geometric &&
        base.kind != base_distribution::family::isotropic_gaussian)
        throw config_error(
            "rate_experiment: the geometric-mixing generator is a stationary Gaussian "
            "AR(1) chain and requires an isotropic Gaussian base");

    const int n_max = ns.back();
    rate_fit fit;
    for (int n : ns) {
        const discrete_measure ref = rate_reference(base, n, n_max, seed);
        std::vector<double> vals(static_cast<std::size_t>(k));
        parallel_for_safe(k, workers, [&](int idx) {
            const std::uint64_t omega = static_cast<std::uint64_t>(idx) + 1;
            discrete_measure mu_n = rate_realization(base, mix, n, seed, omega);
            vals[static_cast<std::size_t>(idx)] = w2sq(mu_n, ref);
        });
        rate_row row;
        row.n = n;
        mean_se(vals, row.mean, row.std_err);
        fit.rows.push_back(row);
    }
    const fit_result f = fit_loglog(fit.rows);
    fit.slope = f.slope;
    fit.intercept = f.intercept;
    fit.slope_ci_lo = f.slope_ci_lo;
    fit.slope_ci_hi = f.slope_ci_hi;
    if (base.d == 1) {
        fit.floor = 0.0;  // deterministic quantile grid, no sampling noise
    } else {
        const discrete_measure ra = rate_reference(base, n_max, n_max, seed);
        const discrete_measure rb = rate_reference(base, n_max, n_max, seed ^ kFloorSeedXor);
        fit.floor = w2sq(ra, rb);
    }
    return fit;
}

concentration_report concentration_experiment(const base_distribution& base, int n,
                                              double delta, int k, std::uint64_t seed,
                                              int workers) {
    base.validate();
    if (n < 2) throw config_error("concentration_experiment: n must be >= 2");
    if (!(delta > 0.0 && delta < 1.0))
        throw config_error("concentration_experiment: delta must lie in (0, 1)");
    if (k < 2) throw config_error("concentration_experiment: need k >= 2 replications");
    const double K = sub_gaussian_constant(base);
    const discrete_measure ref = rate_reference(base, n, n, seed);

    // Independent replication set estimates the mean deviation (the bias
    // term); the main set is then scored against the resulting envelope.
    empirical_iid_sampler bias_samp(base, n, kConcBiasTag);
    std::vector<double> bias_vals(static_cast<std::size_t>(k));
    parallel_for_safe(k, workers, [&](int idx) {
        const std::uint64_t omega = static_cast<std::uint64_t>(idx) + 1;
        bias_vals[static_cast<std::size_t>(idx)] =
            std::sqrt(w2sq(bias_samp.realize(seed, omega), ref));
    });
    double bias = 0.0, bias_se = 0.0;
    mean_se(bias_vals, bias, bias_se);

    concentration_report rep;
    rep.delta = delta;
    rep.bias_n = bias;
    rep.sub_gaussian_k = K;
    rep.k = k;
    rep.epsilon_n =
        bias + K * std::sqrt(2.0 * std::log(1.0 / delta) / static_cast<double>(n));

    empirical_iid_sampler main_samp(base, n, kConcMainTag);
    std::vector<double> main_vals(static_cast<std::size_t>(k));
    parallel_for_safe(k, workers, [&](int idx) {
        const std::uint64_t omega = static_cast<std::uint64_t>(idx) + 1;
        main_vals[static_cast<std::size_t>(idx)] =
            std::sqrt(w2sq(main_samp.realize(seed, omega), ref));
    });
    int covered = 0;
    for (double v : main_vals)
        if (v <= rep.epsilon_n) ++covered;
    rep.coverage = static_cast<double>(covered) / static_cast<double>(k);
    return rep;
}

rate_fit mollification_experiment(const base_distribution& base, const std::vector<int>& ns,
                                  const bandwidth_rule& bw, int k, std::uint64_t seed,
                                  int workers) {
    base.validate();
    check_sizes(ns, 3);
    if (k < 2) throw config_error("mollification_experiment: need k >= 2 replications");
    if (!(bw.c > 0.0)) throw config_error("mollification_experiment: bandwidth c must be > 0");

    const int n_max = ns.back();
    // Dense deterministic stand-in for the population measure; it is only
    // ever sampled from (never fed to the transport solver directly).
    const discrete_measure dense = reference_discretization(base, 16 * n_max, seed);

    rate_fit fit;
    for (int n : ns) {
        const double sigma = bw.decay ? bw.c / std::sqrt(static_cast<double>(n)) : bw.c;
        empirical_iid_sampler samp(base, n, kMollSampleTag);
        std::vector<double> vals(static_cast<std::size_t>(k));
        parallel_for_safe(k, workers, [&](int idx) {
            const std::uint64_t omega = static_cast<std::uint64_t>(idx) + 1;
            discrete_measure mu_n = samp.realize(seed, omega);
            discrete_measure left =
                mollify_sample(mu_n, sigma, n, seed, stream_id(kMollNoiseSampleTag, omega));
            discrete_measure right =
                mollify_sample(dense, sigma, n, seed, stream_id(kMollNoiseRefTag, omega));
            vals[static_cast<std::size_t>(idx)] = w2sq(left, right);
        });
        rate_row row;
        row.n = n;
        mean_se(vals, row.mean, row.std_err);
        fit.rows.push_back(row);
    }
    const fit_result f = fit_loglog(fit.rows);
    fit.slope = f.slope;
    fit.intercept = f.intercept;
    fit.slope_ci_lo = f.slope_ci_lo;
    fit.slope_ci_hi = f.slope_ci_hi;
    const double sigma_max =
        bw.decay ? bw.c / std::sqrt(static_cast<double>(n_max)) : bw.c;
    fit.floor = w2sq(mollify_sample(dense, sigma_max, n_max, seed, stream_id(kMollFloorTag, 1)),
                     mollify_sample(dense, sigma_max, n_max, seed, stream_id(kMollFloorTag, 2)));
    return fit;
}

std::vector<clt_row> clt_variance_experiment(const base_distribution& base_mu,
                                             const base_distribution& base_nu,
                                             const std::vector<std::pair<int, int>>& pairs,
                                             int k, std::uint64_t seed, int workers) {
    base_mu.validate();
    base_nu.validate();
    if (base_mu.d != base_nu.d)
        throw config_error("clt_variance_experiment: base dimensions differ");
    if (pairs.empty()) throw config_error("clt_variance_experiment: no size pairs");
    if (k < 8) throw config_error("clt_variance_experiment: need k >= 8 for a variance");

    std::vector<clt_row> rows;
    for (const auto& [n, m] : pairs) {
        if (n < 2 || m < 2)
            throw config_error("clt_variance_experiment: sizes must be >= 2");
        empirical_iid_sampler samp_mu(base_mu, n, kCltMuTag);
        empirical_iid_sampler samp_nu(base_nu, m, kCltNuTag);
        std::vector<double> vals(static_cast<std::size_t>(k));
        parallel_for_safe(k, workers, [&](int idx) {
            const std::uint64_t omega = static_cast<std::uint64_t>(idx) + 1;
            vals[static_cast<std::size_t>(idx)] =
                w2sq(samp_mu.realize(seed, omega), samp_nu.realize(seed, omega));
        });
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= static_cast<double>(k);
        double ss = 0.0;
        for (double v : vals) ss += (v - mean) * (v - mean);
        const double var = ss / static_cast<double>(k - 1);
        const double scale =
            static_cast<double>(n) * static_cast<double>(m) / static_cast<double>(n + m);
        clt_row row;
        row.n = n;
        row.m = m;
        row.rescaled_var = scale * var;
        // Relative sampling error of a variance over k draws (delta method).
        row.std_err = row.rescaled_var * std::sqrt(2.0 / static_cast<double>(k - 1));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace otrm
