// Acceptance harness: one criterion per invocation (argv[1] = 1..15,
// argv[2] = path to the command-line binary, used by criterion 15).
// Prints exactly one PASS/FAIL line with the measured quantities.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "otrm/bayes.hpp"
#include "otrm/flows.hpp"
#include "otrm/geodesics.hpp"
#include "otrm/io.hpp"
#include "otrm/l2w.hpp"
#include "otrm/measures.hpp"
#include "otrm/ot.hpp"
#include "otrm/rng.hpp"
#include "otrm/stats.hpp"

using namespace otrm;
namespace fs = std::filesystem;

namespace {

struct verdict {
    bool ok = false;
    std::string detail;
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

discrete_measure random_measure(rng& r, int n, int d, bool uniform_w) {
    discrete_measure m;
    m.d = d;
    m.x.resize(static_cast<std::size_t>(n) * d);
    for (double& v : m.x) v = r.uniform(-2.0, 2.0);
    if (uniform_w) {
        m.w.assign(n, 1.0 / n);
    } else {
        m.w.resize(n);
        double tot = 0.0;
        for (double& wv : m.w) {
            wv = r.uniform(0.05, 1.0);
            tot += wv;
        }
        for (double& wv : m.w) wv /= tot;
    }
    return m;
}

std::pair<double, double> mean_se(const std::vector<double>& xs) {
    const int k = static_cast<int>(xs.size());
    double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / k;
    if (k < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (k - 1) / k)};
}

double brute_force_uniform(const discrete_measure& mu, const discrete_measure& nu) {
    const int n = mu.n();
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double tot = 0.0;
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < mu.d; ++j) {
                double diff = mu.point(i)[j] - nu.point(perm[i])[j];
                s += diff * diff;
            }
            tot += s;
        }
        best = std::min(best, tot / n);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// --------------------------------------------------------------------------
// 1. Solver exactness vs the 1D closed form and exhaustive search.
// --------------------------------------------------------------------------
verdict criterion_1() {
    rng r(9001, 1);
    double worst_1d = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        const bool uniform = rep % 3 == 0;
        const int n = 2 + static_cast<int>(r.u01() * 62);
        const int m = uniform ? n : 2 + static_cast<int>(r.u01() * 62);
        discrete_measure mu = random_measure(r, n, 1, uniform);
        discrete_measure nu = random_measure(r, m, 1, uniform);
        worst_1d = std::max(worst_1d, std::abs(w2_exact(mu, nu).w2 - w2_1d(mu, nu)));
    }

    double worst_brute = 0.0;
    for (int n = 2; n <= 7; ++n) {
        for (int rep = 0; rep < 10; ++rep) {
            const int d = 1 + rep % 3;
            discrete_measure mu = random_measure(r, n, d, true);
            discrete_measure nu = random_measure(r, n, d, true);
            worst_brute = std::max(
                worst_brute, std::abs(w2_exact(mu, nu).cost2 - brute_force_uniform(mu, nu)));
        }
    }

    verdict v;
    v.ok = worst_1d <= 1e-9 && worst_brute <= 1e-10;
    v.detail = "max |w2_exact-w2_1d| = " + fmt(worst_1d) +
               " (<= 1e-9), max |cost2-exhaustive| = " + fmt(worst_brute) + " (<= 1e-10)";
    return v;
}

// --------------------------------------------------------------------------
// 2. Metric properties on random triples.
// --------------------------------------------------------------------------
verdict criterion_2() {
    rng r(9002, 1);
    double worst_sym = 0.0, worst_tri = -1e300;
    for (int rep = 0; rep < 200; ++rep) {
        const int d = 1 + rep % 4;
        auto size = [&] { return 2 + static_cast<int>(r.u01() * 30); };
        discrete_measure a = random_measure(r, size(), d, rep % 2 == 0);
        discrete_measure b = random_measure(r, size(), d, false);
        discrete_measure c = random_measure(r, size(), d, false);
        const double ab = w2_exact(a, b).w2;
        const double ba = w2_exact(b, a).w2;
        const double bc = w2_exact(b, c).w2;
        const double ac = w2_exact(a, c).w2;
        worst_sym = std::max(worst_sym, std::abs(ab - ba));
        worst_tri = std::max(worst_tri, ac - ab - bc);
    }
    verdict v;
    v.ok = worst_sym <= 1e-10 && worst_tri <= 1e-9;
    v.detail = "max symmetry dev = " + fmt(worst_sym) +
               " (<= 1e-10), max triangle excess = " + fmt(worst_tri) + " (<= 1e-9)";
    return v;
}

// --------------------------------------------------------------------------
// 3. Geodesics: constant speed, kinetic energy, lifted constant speed.
// --------------------------------------------------------------------------
verdict criterion_3() {
    rng r(9003, 1);
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);

    double worst_speed = 0.0, worst_ke = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const int d = 1 + rep % 3;
        const bool uniform = rep % 2 == 0;
        const int n = 4 + static_cast<int>(r.u01() * 20);
        const int m = uniform ? n : 4 + static_cast<int>(r.u01() * 20);
        discrete_measure mu = random_measure(r, n, d, uniform);
        discrete_measure nu = random_measure(r, m, d, uniform);
        transport_result res = w2_exact(mu, nu);
        worst_ke = std::max(worst_ke, std::abs(kinetic_energy(res) - res.cost2));
        geodesic_path path;
        path.source = res.source;
        path.target = res.target;
        path.plan = res.plan;
        path.t_grid = grid;
        worst_speed = std::max(worst_speed, constant_speed_error(path));
    }

    // Lifted path over K = 100 replications of an empirical pair.
    const int K = 100;
    empirical_iid_sampler sa(base_distribution::gaussian(2, 1.0), 32, 0x31);
    empirical_iid_sampler sb(base_distribution::uniform_cube(0.0, 1.0, 2), 32, 0x32);
    const std::vector<std::pair<double, double>> spans = {
        {0.0, 1.0}, {0.0, 0.5}, {0.5, 1.0}, {0.25, 0.75}};
    std::vector<std::vector<double>> vals(spans.size());
    for (int omega = 1; omega <= K; ++omega) {
        discrete_measure mu = sa.realize(777, omega);
        discrete_measure nu = sb.realize(777, omega);
        transport_result res = w2_exact(mu, nu);
        for (std::size_t p = 0; p < spans.size(); ++p) {
            discrete_measure es = interpolate(res, spans[p].first);
            discrete_measure et = interpolate(res, spans[p].second);
            vals[p].push_back(w2sq(es, et));
        }
    }
    auto [m01, se01] = mean_se(vals[0]);
    double worst_lifted = 0.0;  // deviation measured in propagated stderr units
    for (std::size_t p = 1; p < spans.size(); ++p) {
        auto [mst, sest] = mean_se(vals[p]);
        const double f = spans[p].second - spans[p].first;
        const double dev = std::abs(std::sqrt(mst) - f * std::sqrt(m01));
        const double sigma = sest / (2.0 * std::sqrt(mst)) +
                             f * se01 / (2.0 * std::sqrt(m01));
        worst_lifted = std::max(worst_lifted, dev / sigma);
    }

    verdict v;
    v.ok = worst_speed <= 1e-6 && worst_ke <= 1e-12 && worst_lifted <= 3.0;
    v.detail = "max speed err = " + fmt(worst_speed) +
               " (<= 1e-6), max KE dev = " + fmt(worst_ke) +
               " (<= 1e-12), lifted dev = " + fmt(worst_lifted) + " stderr (<= 3)";
    return v;
}

// --------------------------------------------------------------------------
// 4. Strict decrease of the mean distance in n, i.i.d. and AR(1).
// --------------------------------------------------------------------------
verdict criterion_4() {
    const auto gauss = base_distribution::gaussian(1, 1.0);
    const std::vector<int> ns = {32, 128, 512, 2048};
    bool ok = true;
    double worst_margin = 1e300;  // smallest gap measured in joint-stderr units
    for (int arm = 0; arm < 2; ++arm) {
        const mixing_spec mix =
            arm == 0 ? mixing_spec::iid() : mixing_spec::geometric(std::log(2.0));
        rate_fit fit = rate_experiment(gauss, ns, 100, mix, 904);
        for (std::size_t i = 0; i + 1 < fit.rows.size(); ++i) {
            const double gap = fit.rows[i].mean - fit.rows[i + 1].mean;
            const double joint =
                std::hypot(fit.rows[i].std_err, fit.rows[i + 1].std_err);
            worst_margin = std::min(worst_margin, gap / joint);
            if (gap <= 2.0 * joint) ok = false;
        }
    }
    verdict v;
    v.ok = ok;
    v.detail = "smallest decrease across both arms = " + fmt(worst_margin) +
               " joint stderr (> 2 required)";
    return v;
}

// --------------------------------------------------------------------------
// 5. d=5 cube rate: fitted slope within the sharp-rate band.
// --------------------------------------------------------------------------
verdict criterion_5() {
    const auto cube = base_distribution::uniform_cube(0.0, 1.0, 5);
    const std::vector<int> ns = {64, 128, 256, 512, 1024, 2048, 4096};
    rate_fit fit = rate_experiment(cube, ns, 100, mixing_spec::iid(), 905);
    verdict v;
    v.ok = fit.slope >= -0.5 && fit.slope <= -0.3;
    v.detail = "slope = " + fmt(fit.slope) + " (in [-0.5, -0.3]), floor = " +
               fmt(fit.floor);
    return v;
}

// --------------------------------------------------------------------------
// 6. 1D constant: n * E[W2^2] for U[0,1] at n = 1024.
// --------------------------------------------------------------------------
verdict criterion_6() {
    const int n = 1024;
    const auto cube = base_distribution::uniform_cube(0.0, 1.0, 1);
    empirical_iid_sampler emp(cube, n, 0x61);
    constant_sampler ref(reference_discretization(cube, 16 * n, 906));
    l2w_estimate est = estimate_d(emp, ref, 500, 906);
    const double scaled = n * est.mean_w2_sq;
    verdict v;
    v.ok = scaled >= 0.15 && scaled <= 0.19;
    v.detail = "n*mean = " + fmt(scaled) + " (in [0.15, 0.19], target 1/6), stderr = " +
               fmt(n * est.std_err);
    return v;
}

// --------------------------------------------------------------------------
// 7. Mixing leaves the fitted rate order unchanged (d = 1 and d = 5).
// --------------------------------------------------------------------------
verdict criterion_7() {
    const mixing_spec geo = mixing_spec::geometric(std::log(2.0));  // lag-1 rho = 0.5
    const auto g1 = base_distribution::gaussian(1, 1.0);
    rate_fit iid1 = rate_experiment(g1, {32, 128, 512, 2048}, 100, mixing_spec::iid(), 907);
    rate_fit ar1 = rate_experiment(g1, {32, 128, 512, 2048}, 100, geo, 907);
    const double diff1 = std::abs(iid1.slope - ar1.slope);

    const auto g5 = base_distribution::gaussian(5, 1.0);
    rate_fit iid5 = rate_experiment(g5, {64, 128, 256, 512}, 60, mixing_spec::iid(), 907);
    rate_fit ar5 = rate_experiment(g5, {64, 128, 256, 512}, 60, geo, 907);
    const double diff5 = std::abs(iid5.slope - ar5.slope);

    verdict v;
    v.ok = diff1 <= 0.1 && diff5 <= 0.1;
    v.detail = "slope gap d=1: " + fmt(diff1) + ", d=5: " + fmt(diff5) +
               " (both <= 0.1; iid slopes " + fmt(iid1.slope) + ", " + fmt(iid5.slope) + ")";
    return v;
}

// --------------------------------------------------------------------------
// 8. Concentration: exceedance of epsilon_n(delta) within binomial noise.
// --------------------------------------------------------------------------
verdict criterion_8() {
    const int k = 500;
    const double delta = 0.1;
    concentration_report rep =
        concentration_experiment(base_distribution::gaussian(1, 1.0), 256, delta, k, 908);
    const double exceedance = 1.0 - rep.coverage;
    const double bound = delta + 2.0 * std::sqrt(delta * (1.0 - delta) / k);
    verdict v;
    v.ok = exceedance <= bound;
    v.detail = "exceedance = " + fmt(exceedance) + " (<= " + fmt(bound) +
               "), epsilon_n = " + fmt(rep.epsilon_n);
    return v;
}

// --------------------------------------------------------------------------
// 9. Mollification: smoothing-bias inequality and constant-bandwidth flatness.
// --------------------------------------------------------------------------
verdict criterion_9() {
    // 1D Gaussian closed form: W2(N(0,1), N(0,1+s^2)) = sqrt(1+s^2) - 1.
    const int grid_n = 20000;
    const auto base = base_distribution::gaussian(1, 1.0);
    discrete_measure dense = reference_discretization(base, grid_n, 909);
    double worst_closed = 0.0;
    bool bias_ok = true;
    for (double s : {0.1, 0.5, 1.0}) {
        const auto smoothed = base_distribution::gaussian(1, std::sqrt(1.0 + s * s));
        discrete_measure dense_s = reference_discretization(smoothed, grid_n, 909);
        const double w = w2_1d(dense, dense_s);
        const double closed = std::sqrt(1.0 + s * s) - 1.0;
        worst_closed = std::max(worst_closed, std::abs(w - closed));
        if (w * w > s * s) bias_ok = false;  // W2^2(mu^s, mu) <= d s^2 with d = 1
    }

    bandwidth_rule flat;
    flat.c = 0.5;
    flat.decay = false;
    rate_fit fit = mollification_experiment(base, {64, 128, 256, 512}, flat, 100, 909);
    double mx = 0.0, mn = 1e300;
    for (const rate_row& row : fit.rows) {
        mx = std::max(mx, row.n * row.mean);
        mn = std::min(mn, row.n * row.mean);
    }
    const double spread = mx / mn;

    verdict v;
    v.ok = bias_ok && worst_closed <= 1e-4 && spread <= 3.0;
    v.detail = std::string("bias bound ") + (bias_ok ? "holds" : "VIOLATED") +
               ", closed-form dev = " + fmt(worst_closed) +
               " (<= 1e-4), n*mean spread = " + fmt(spread) + " (<= 3)";
    return v;
}

// --------------------------------------------------------------------------
// 10. Two-sample variance stabilization under nm/(n+m) rescaling.
// --------------------------------------------------------------------------
verdict criterion_10() {
    // Distinct laws so the rescaled variance has a positive limit.
    const auto mu = base_distribution::gaussian(std::vector<double>{0.0}, 1.0);
    const auto nu = base_distribution::gaussian(std::vector<double>{1.0}, 1.0);
    auto rows = clt_variance_experiment(mu, nu, {{256, 256}, {1024, 1024}}, 400, 910);
    const double ratio = std::max(rows[0].rescaled_var, rows[1].rescaled_var) /
                         std::min(rows[0].rescaled_var, rows[1].rescaled_var);
    verdict v;
    v.ok = ratio <= 1.5;
    v.detail = "rescaled vars = " + fmt(rows[0].rescaled_var) + ", " +
               fmt(rows[1].rescaled_var) + "; ratio = " + fmt(ratio) + " (<= 1.5)";
    return v;
}

// --------------------------------------------------------------------------
// 11. Attention field: gradient check, energy ascent, norms, equivariance.
// --------------------------------------------------------------------------
verdict criterion_11() {
    const double beta = 1.0;
    particle_ensemble e = sphere_ensemble(8, 3, 911, 1);
    auto vel = velocity_usa(e, beta);

    // Finite-difference tangential gradient; the field is n * grad E.
    const double h = 1e-6;
    double worst_grad = 0.0, grad_scale = 0.0;
    for (int i = 0; i < e.n(); ++i) {
        double g[3];
        for (int c = 0; c < 3; ++c) {
            particle_ensemble plus = e, minus = e;
            plus.on_sphere = minus.on_sphere = false;
            plus.row(i)[c] += h;
            minus.row(i)[c] -= h;
            g[c] = (interaction_energy(plus, beta) - interaction_energy(minus, beta)) /
                   (2.0 * h);
        }
        double dot = 0.0;
        for (int c = 0; c < 3; ++c) dot += g[c] * e.row(i)[c];
        double err2 = 0.0, ref2 = 0.0;
        for (int c = 0; c < 3; ++c) {
            const double tangential = e.n() * (g[c] - dot * e.row(i)[c]);
            err2 += (vel[3 * i + c] - tangential) * (vel[3 * i + c] - tangential);
            ref2 += vel[3 * i + c] * vel[3 * i + c];
        }
        worst_grad = std::max(worst_grad, std::sqrt(err2));
        grad_scale = std::max(grad_scale, std::sqrt(ref2));
    }
    const double rel_grad = worst_grad / grad_scale;

    // Energy ascent and norm preservation over T = 10.
    vector_field_spec f;
    f.kind = vector_field_spec::family::usa;
    f.beta = beta;
    flow_trajectory traj = simulate(e, f, 0.1, 10.0, 1);
    double worst_drop = 0.0, worst_norm = 0.0;
    for (std::size_t s = 0; s + 1 < traj.energies.size(); ++s)
        worst_drop = std::max(worst_drop, traj.energies[s] - traj.energies[s + 1]);
    for (const particle_ensemble& snap : traj.snapshots) {
        for (int i = 0; i < snap.n(); ++i) {
            double r2 = 0.0;
            for (int c = 0; c < 3; ++c) r2 += snap.row(i)[c] * snap.row(i)[c];
            worst_norm = std::max(worst_norm, std::abs(std::sqrt(r2) - 1.0));
        }
    }

    // Permutation and rotation equivariance.
    double worst_equi = 0.0;
    std::vector<int> order = {5, 2, 7, 0, 3, 6, 1, 4};
    particle_ensemble perm = e;
    for (int i = 0; i < 8; ++i)
        for (int c = 0; c < 3; ++c) perm.row(i)[c] = e.row(order[i])[c];
    auto vp = velocity_usa(perm, beta);
    for (int i = 0; i < 8; ++i)
        for (int c = 0; c < 3; ++c)
            worst_equi = std::max(worst_equi,
                                  std::abs(vp[3 * i + c] - vel[3 * order[i] + c]));
    const double ca = std::cos(0.7), sa = std::sin(0.7);
    const double cb = std::cos(0.4), sb = std::sin(0.4);
    auto rot = [&](const double* p, double* q) {
        const double t0 = ca * p[0] - sa * p[1];
        const double t1 = sa * p[0] + ca * p[1];
        q[0] = t0;
        q[1] = cb * t1 - sb * p[2];
        q[2] = sb * t1 + cb * p[2];
    };
    particle_ensemble re = e;
    for (int i = 0; i < 8; ++i) rot(e.row(i), re.row(i));
    auto vr = velocity_usa(re, beta);
    for (int i = 0; i < 8; ++i) {
        double want[3];
        rot(&vel[3 * i], want);
        for (int c = 0; c < 3; ++c)
            worst_equi = std::max(worst_equi, std::abs(vr[3 * i + c] - want[c]));
    }

    verdict v;
    v.ok = rel_grad <= 1e-5 && worst_drop <= 1e-8 && worst_norm <= 1e-12 &&
           worst_equi <= 1e-10;
    v.detail = "grad rel err = " + fmt(rel_grad) + " (<= 1e-5), max energy drop = " +
               fmt(worst_drop) + " (<= 1e-8), max |norm-1| = " + fmt(worst_norm) +
               " (<= 1e-12), equivariance dev = " + fmt(worst_equi) + " (<= 1e-10)";
    return v;
}

// --------------------------------------------------------------------------
// 12. Propagation of chaos with a Gronwall envelope against n_ref = 4096.
// --------------------------------------------------------------------------
verdict criterion_12() {
    const double beta = 1.0, dt = 0.05, t_end = 2.0;
    const int stride = 10;  // snapshots at t = 0, 0.5, 1.0, 1.5, 2.0
    const int K = 8;
    const std::uint64_t seed = 912, tag = 0x4331;
    const double e1 = std::exp(1.0);
    const double L = 4.0 * e1 * e1 + 1.0 + 6.0 * e1;  // envelope rate constant

    vector_field_spec f;
    f.kind = vector_field_spec::family::usa;
    f.beta = beta;

    particle_ensemble ref0 = sphere_ensemble(4096, 3, seed, stream_id(tag, 0));
    flow_trajectory ref = simulate(ref0, f, dt, t_end, stride);

    std::vector<double> means, ses;
    double worst_ratio = 0.0;
    bool all_envelopes = true;
    for (int n : {64, 256, 1024}) {
        std::vector<double> sups;
        for (int omega = 1; omega <= K; ++omega) {
            particle_ensemble e0 = sphere_ensemble(n, 3, seed, stream_id(tag, omega));
            flow_trajectory traj = simulate(e0, f, dt, t_end, stride);
            gronwall_report rep = gronwall_check(traj, ref, L);
            if (!rep.satisfied) all_envelopes = false;
            worst_ratio = std::max(worst_ratio, rep.max_ratio);
            sups.push_back(*std::max_element(rep.w2sq_at_t.begin(), rep.w2sq_at_t.end()));
        }
        auto [m, se] = mean_se(sups);
        means.push_back(m);
        ses.push_back(se);
    }

    bool decreasing = true;
    double worst_margin = 1e300;
    for (std::size_t i = 0; i + 1 < means.size(); ++i) {
        const double gap = means[i] - means[i + 1];
        const double joint = std::hypot(ses[i], ses[i + 1]);
        worst_margin = std::min(worst_margin, gap / joint);
        if (gap <= 2.0 * joint) decreasing = false;
    }

    verdict v;
    v.ok = decreasing && all_envelopes && worst_ratio <= 1.05;
    v.detail = "sup W2^2 means = {" + fmt(means[0]) + ", " + fmt(means[1]) + ", " +
               fmt(means[2]) + "}, smallest decrease = " + fmt(worst_margin) +
               " joint stderr (> 2), max envelope ratio = " + fmt(worst_ratio) +
               " (<= 1.05)";
    return v;
}

// --------------------------------------------------------------------------
// 13. Bayesian consistency: parametric slope and analytic agreement.
// --------------------------------------------------------------------------
verdict criterion_13() {
    const auto truth = base_distribution::gaussian(std::vector<double>{0.3}, 1.0);
    posterior_model m0;
    m0.d = 1;
    m0.prior_mean = {0.0};
    m0.prior_var = 1.0;
    m0.likelihood_var = 1.0;
    consistency_result res =
        consistency_experiment(truth, m0, {16, 64, 256, 1024}, 100, 913, 1, 512, 4096);
    double worst_dev = 0.0;  // deviation from analytic + floor in stderr units
    for (std::size_t i = 0; i < res.fit.rows.size(); ++i) {
        const rate_row& row = res.fit.rows[i];
        worst_dev = std::max(worst_dev,
                             std::abs(row.mean - (res.analytic[i] + res.floor)) /
                                 row.std_err);
    }
    verdict v;
    v.ok = std::abs(res.fit.slope + 1.0) <= 0.15 && worst_dev <= 5.0;
    v.detail = "slope = " + fmt(res.fit.slope) +
               " (in -1 +- 0.15), analytic dev = " + fmt(worst_dev) +
               " stderr (<= 5), floor = " + fmt(res.floor);
    return v;
}

// --------------------------------------------------------------------------
// 14. Posterior-initialized flows: decreasing sup W2^2 plus Gronwall.
// --------------------------------------------------------------------------
verdict criterion_14() {
    const auto truth = base_distribution::gaussian(3, 1.0);
    posterior_model m0;
    m0.d = 3;
    m0.prior_mean = {0.0, 0.0, 0.0};
    m0.prior_var = 1.0;
    m0.likelihood_var = 1.0;
    vector_field_spec f;
    f.kind = vector_field_spec::family::usa;
    f.beta = 1.0;
    bayes_flow_result res = bayes_flow_experiment(truth, m0, {8, 64, 512}, f, 0.05, 1.0,
                                                  12, 914, 1, 256, 2048);
    bool decreasing = true;
    for (std::size_t i = 0; i + 1 < res.rows.size(); ++i)
        if (res.rows[i + 1].mean_sup_w2sq >= res.rows[i].mean_sup_w2sq) decreasing = false;
    bool envelopes = true;
    double worst_ratio = 0.0;
    for (const bayes_flow_row& row : res.rows) {
        envelopes = envelopes && row.gronwall_satisfied;
        worst_ratio = std::max(worst_ratio, row.max_gronwall_ratio);
    }
    verdict v;
    v.ok = decreasing && envelopes;
    v.detail = "sup W2^2 means = {" + fmt(res.rows[0].mean_sup_w2sq) + ", " +
               fmt(res.rows[1].mean_sup_w2sq) + ", " + fmt(res.rows[2].mean_sup_w2sq) +
               "} decreasing, max envelope ratio = " + fmt(worst_ratio) + " (<= 1.05)";
    return v;
}

// --------------------------------------------------------------------------
// 15. Determinism through the command-line interface.
// --------------------------------------------------------------------------
struct cli_runner {
    std::string cli;
    fs::path dir;
    int failures = 0;
    int comparisons = 0;

    explicit cli_runner(std::string cli_path) : cli(std::move(cli_path)) {
        char tmpl[] = "/tmp/otrm_accept_XXXXXX";
        if (!mkdtemp(tmpl)) throw std::runtime_error("mkdtemp failed");
        dir = tmpl;
    }
    ~cli_runner() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }

    bool run(const std::string& args) {
        const std::string cmd =
            "\"" + cli + "\" " + args + " > /dev/null 2> /dev/null";
        const int rc = std::system(cmd.c_str());
        return rc != -1 && WIFEXITED(rc) && WEXITSTATUS(rc) == 0;
    }

    std::string p(const std::string& name) const { return (dir / name).string(); }

    // Runs the command once per variant suffix and byte-compares the outputs.
    void check(const std::string& stem, const std::string& args,
               const std::vector<std::string>& variants) {
        std::vector<std::string> contents;
        for (std::size_t i = 0; i < variants.size(); ++i) {
            const std::string out = p(stem + "_" + std::to_string(i) + ".csv");
            if (!run(args + " " + variants[i] + " --out \"" + out + "\"")) {
                ++failures;
                return;
            }
            contents.push_back(read_text_file(out));
        }
        for (std::size_t i = 1; i < contents.size(); ++i) {
            ++comparisons;
            if (contents[i] != contents[0]) ++failures;
        }
    }
};

verdict criterion_15(const std::string& cli) {
    cli_runner runner(cli);
    const std::vector<std::string> reruns = {"", "", "--workers 2", "--workers 4"};

    runner.check("rates",
                 "rates --dist '{\"kind\":\"uniform_cube\",\"d\":1}' --ns 32,64,128 "
                 "--k 8 --seed 9150",
                 reruns);
    runner.check("flow",
                 "flow --field usa --beta 1 --n 16 --d 3 --dt 0.05 --t-end 0.5 "
                 "--stride 2 --seed 9151",
                 reruns);
    runner.check("mollify",
                 "mollify --dist '{\"kind\":\"gaussian\",\"d\":1}' --ns 16,32,64 "
                 "--k 6 --c 0.5 --seed 9152",
                 reruns);
    runner.check("clt",
                 "clt --dist-a '{\"kind\":\"uniform_cube\",\"d\":1}' "
                 "--dist-b '{\"kind\":\"uniform_cube\",\"d\":1}' --pairs 32:32,64:64 "
                 "--k 8 --seed 9153",
                 reruns);
    runner.check("bayes",
                 "bayes --truth '{\"kind\":\"gaussian\",\"d\":1}' --ns 16,32,64 --k 6 "
                 "--n-atoms 64 --n-ref 512 --seed 9154",
                 reruns);

    verdict v;
    v.ok = runner.failures == 0 && runner.comparisons == 15;
    v.detail = std::to_string(runner.comparisons) +
               " byte comparisons across reruns and worker counts, " +
               std::to_string(runner.failures) + " mismatches";
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: acceptance <criterion 1..15> [cli-path]\n";
        return 2;
    }
    const int crit = std::atoi(argv[1]);
    const std::string cli = argc > 2 ? argv[2] : "";
    verdict v;
    try {
        switch (crit) {
            case 1: v = criterion_1(); break;
            case 2: v = criterion_2(); break;
            case 3: v = criterion_3(); break;
            case 4: v = criterion_4(); break;
            case 5: v = criterion_5(); break;
            case 6: v = criterion_6(); break;
            case 7: v = criterion_7(); break;
            case 8: v = criterion_8(); break;
            case 9: v = criterion_9(); break;
            case 10: v = criterion_10(); break;
            case 11: v = criterion_11(); break;
            case 12: v = criterion_12(); break;
            case 13: v = criterion_13(); break;
            case 14: v = criterion_14(); break;
            case 15:
                if (cli.empty()) {
                    std::cerr << "criterion 15 needs the cli path\n";
                    return 2;
                }
                v = criterion_15(cli);
                break;
            default:
                std::cerr << "unknown criterion " << crit << "\n";
                return 2;
        }
    } catch (const std::exception& e) {
        v.ok = false;
        v.detail = std::string("exception: ") + e.what();
    }
    std::cout << "criterion " << crit << ": " << (v.ok ? "PASS" : "FAIL") << " — "
              << v.detail << "\n";
    return v.ok ? 0 : 1;
}
