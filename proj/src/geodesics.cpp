#include "otrm/geodesics.hpp"

#include <cmath>
#include <vector>

#include "otrm/errors.hpp"
#include "otrm/parallel.hpp"
#include "otrm/stats.hpp"

namespace otrm {

void geodesic_path::validate() const {
    source.validate();
    target.validate();
    if (source.d != target.d)
        throw config_error("geodesic_path: endpoint dimensions differ");
    if (t_grid.empty()) throw config_error("geodesic_path: empty time grid");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] >= 0.0 && t_grid[i] <= 1.0))
            throw config_error("geodesic_path: grid time outside [0, 1]");
        if (i > 0 && !(t_grid[i] > t_grid[i - 1]))
            throw config_error("geodesic_path: grid times not strictly increasing");
    }
    if (plan.entries.empty()) throw config_error("geodesic_path: empty coupling");
    marginal_report rep = check_coupling(plan, source, target);
    if (!rep.ok) throw config_error("geodesic_path: coupling marginals do not match endpoints");
}

discrete_measure interpolate(const transport_result& res, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw config_error("interpolate: t outside [0, 1]");
    const int d = res.source.d;
    discrete_measure out;
    out.d = d;
    out.w.reserve(res.plan.entries.size());
    out.x.reserve(res.plan.entries.size() * static_cast<std::size_t>(d));
    for (const coupling_entry& e : res.plan.entries) {
        const double* p = res.source.point(e.i);
        const double* q = res.target.point(e.j);
        out.w.push_back(e.mass);
        for (int c = 0; c < d; ++c) out.x.push_back((1.0 - t) * p[c] + t * q[c]);
    }
    return out;
}

double constant_speed_error(const geodesic_path& path) {
    path.validate();
    const double base = w2_exact(path.source, path.target).w2;
    if (!(base > 0.0))
        throw config_error("constant_speed_error: endpoints coincide (zero-length path)");

    transport_result res;
    res.plan = path.plan;
    res.source = path.source;
    res.target = path.target;

    std::vector<discrete_measure> etas;
    etas.reserve(path.t_grid.size());
    for (double t : path.t_grid) etas.push_back(interpolate(res, t));

    double worst = 0.0;
    for (std::size_t i = 0; i < etas.size(); ++i) {
        for (std::size_t j = i + 1; j < etas.size(); ++j) {
            const double dist = w2_exact(etas[i], etas[j]).w2;
            const double expected = (path.t_grid[j] - path.t_grid[i]) * base;
            const double err = std::abs(dist - expected) / base;
            if (err > worst) worst = err;
        }
    }
    return worst;
}

double kinetic_energy(const transport_result& res) {
    const int d = res.source.d;
    double total = 0.0;
    for (const coupling_entry& e : res.plan.entries) {
        const double* p = res.source.point(e.i);
        const double* q = res.target.point(e.j);
        double c = 0.0;
        for (int k = 0; k < d; ++k) {
            const double diff = p[k] - q[k];
            c += diff * diff;
        }
        if (c < kCostClamp) c = 0.0;
        total += e.mass * c;
    }
    if (total < kCostClamp) total = 0.0;
    return total;
}

rate_fit interpolant_convergence(const discrete_measure& mu_ref,
                                 const discrete_measure& nu_ref,
                                 const base_distribution& base_mu,
                                 const base_distribution& base_nu,
                                 const std::vector<int>& ns,
                                 const std::vector<double>& t_grid, int k,
                                 std::uint64_t seed, int workers) {
    if (ns.size() < 2) throw config_error("interpolant_convergence: need at least two sizes");
    for (int n : ns)
        if (n < 2) throw config_error("interpolant_convergence: sizes must be >= 2");
    if (t_grid.empty()) throw config_error("interpolant_convergence: empty time grid");
    for (double t : t_grid)
        if (!(t >= 0.0 && t <= 1.0))
            throw config_error("interpolant_convergence: grid time outside [0, 1]");
    if (k < 2) throw config_error("interpolant_convergence: need k >= 2 replications");
    if (mu_ref.d != base_mu.d || nu_ref.d != base_nu.d || base_mu.d != base_nu.d)
        throw config_error("interpolant_convergence: dimension mismatch");

    const transport_result ref = w2_exact(mu_ref, nu_ref);
    std::vector<discrete_measure> ref_etas;
    ref_etas.reserve(t_grid.size());
    for (double t : t_grid) ref_etas.push_back(interpolate(ref, t));

    // Distinct purpose tags keep the two sample arms independent.
    constexpr std::uint64_t kMuTag = 0x4750;  // geodesic mu arm
    constexpr std::uint64_t kNuTag = 0x4751;  // geodesic nu arm

    rate_fit fit;
    for (int n : ns) {
        empirical_iid_sampler samp_mu(base_mu, n, kMuTag);
        empirical_iid_sampler samp_nu(base_nu, n, kNuTag);
        std::vector<double> vals(static_cast<std::size_t>(k));
        parallel_for_safe(k, workers, [&](int idx) {
            const std::uint64_t omega = static_cast<std::uint64_t>(idx) + 1;
            discrete_measure mu_n = samp_mu.realize(seed, omega);
            discrete_measure nu_n = samp_nu.realize(seed, omega);
            transport_result res = w2_exact(mu_n, nu_n);
            double sup = 0.0;
            for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
                discrete_measure eta = interpolate(res, t_grid[ti]);
                const double dsq = w2_exact(eta, ref_etas[ti]).cost2;
                if (dsq > sup) sup = dsq;
            }
            vals[static_cast<std::size_t>(idx)] = sup;
        });
        double sum = 0.0;
        for (double v : vals) sum += v;
        const double mean = sum / static_cast<double>(k);
        double ss = 0.0;
        for (double v : vals) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / static_cast<double>(k - 1));
        fit.rows.push_back({n, mean, sd / std::sqrt(static_cast<double>(k))});
    }

    const fit_result f = fit_loglog(fit.rows);
    fit.slope = f.slope;
    fit.intercept = f.intercept;
    fit.slope_ci_lo = f.slope_ci_lo;
    fit.slope_ci_hi = f.slope_ci_hi;
    fit.floor = 0.0;
    return fit;
}

}  // namespace otrm
