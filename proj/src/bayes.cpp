#include "otrm/bayes.hpp"

#include <cmath>
#include <vector>

#include "otrm/errors.hpp"
#include "otrm/ot.hpp"
#include "otrm/parallel.hpp"
#include "otrm/stats.hpp"

namespace otrm {

namespace {

constexpr std::uint64_t kDataTag = 0x4241;       // observation draws
constexpr std::uint64_t kAtomTag = 0x4242;       // posterior realizations
constexpr std::uint64_t kFlowDataTag = 0x4243;   // observation draws (flow)
constexpr std::uint64_t kFlowAtomTag = 0x4244;   // posterior realizations (flow)

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

}  // namespace

void posterior_model::validate() const {
    if (d < 1) throw config_error("posterior_model: dimension must be >= 1");
    if (static_cast<int>(prior_mean.size()) != d)
        throw config_error("posterior_model: prior_mean size does not match d");
    if (!(prior_var > 0.0) || !std::isfinite(prior_var))
        throw config_error("posterior_model: prior_var must be positive");
    if (!(likelihood_var > 0.0) || !std::isfinite(likelihood_var))
        throw config_error("posterior_model: likelihood_var must be positive");
    if (n_obs < 0) throw config_error("posterior_model: negative observation count");
    if (n_obs > 0 && static_cast<int>(data_mean.size()) != d)
        throw config_error("posterior_model: data_mean size does not match d");
    for (double v : prior_mean)
        if (!std::isfinite(v)) throw config_error("posterior_model: non-finite prior mean");
    for (double v : data_mean)
        if (!std::isfinite(v)) throw config_error("posterior_model: non-finite data mean");
}

std::vector<double> posterior_model::posterior_mean() const {
    std::vector<double> out(prior_mean);
    if (n_obs == 0) return out;
    const double nn = static_cast<double>(n_obs);
    const double w = (nn / likelihood_var) / (1.0 / prior_var + nn / likelihood_var);
    for (int c = 0; c < d; ++c) out[c] = (1.0 - w) * prior_mean[c] + w * data_mean[c];
    return out;
}

double posterior_model::posterior_var() const {
    const double nn = static_cast<double>(n_obs);
    return 1.0 / (1.0 / prior_var + nn / likelihood_var);
}

posterior_model posterior_update(const posterior_model& m, const point_list& data) {
    m.validate();
    if (data.d != m.d) throw config_error("posterior_update: data dimension mismatch");
    const int cnt = data.n();
    if (cnt == 0) return m;
    posterior_model out = m;
    out.data_mean.assign(static_cast<std::size_t>(m.d), 0.0);
    const double old_n = static_cast<double>(m.n_obs);
    const double new_n = old_n + static_cast<double>(cnt);
    for (int c = 0; c < m.d; ++c) {
        double s = m.n_obs > 0 ? old_n * m.data_mean[c] : 0.0;
        for (int i = 0; i < cnt; ++i) s += data.row(i)[c];
        out.data_mean[c] = s / new_n;
    }
    out.n_obs = m.n_obs + cnt;
    return out;
}

posterior_sampler::posterior_sampler(posterior_model m, int n_atoms_, atom_scheme scheme_,
                                     std::uint64_t tag)
    : model(std::move(m)), n_atoms(n_atoms_), scheme(scheme_), stream_tag(tag) {
    model.validate();
    if (n_atoms < 1) throw config_error("posterior_sampler: n_atoms must be >= 1");
    if (scheme == atom_scheme::quantile && model.d != 1)
        throw config_error("posterior_sampler: quantile atoms exist only in d = 1");
    if (scheme == atom_scheme::automatic)
        scheme = model.d == 1 ? atom_scheme::quantile : atom_scheme::iid;
}

discrete_measure posterior_sampler::atoms_at(const std::vector<double>& center,
                                             std::uint64_t seed, std::uint64_t omega) const {
    if (static_cast<int>(center.size()) != model.d)
        throw config_error("posterior_sampler: center size does not match d");
    const double s = std::sqrt(model.likelihood_var);
    discrete_measure out;
    out.d = model.d;
    out.w.assign(static_cast<std::size_t>(n_atoms), 1.0 / static_cast<double>(n_atoms));
    out.x.resize(static_cast<std::size_t>(n_atoms) * model.d);
    if (scheme == atom_scheme::quantile) {
        for (int i = 0; i < n_atoms; ++i) {
            const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(n_atoms);
            out.x[static_cast<std::size_t>(i)] = center[0] + s * normal_icdf(p);
        }
        return out;
    }
    rng r(seed, stream_id(stream_tag, omega));
    // Skip the normals realize() spends on theta*, so the atom noise here is
    // exactly the noise a realize() call at the same (seed, omega) would use.
    for (int c = 0; c < model.d; ++c) (void)r.normal();
    for (int i = 0; i < n_atoms; ++i)
        for (int c = 0; c < model.d; ++c)
            out.x[static_cast<std::size_t>(i) * model.d + c] = center[c] + s * r.normal();
    return out;
}

discrete_measure posterior_sampler::realize(std::uint64_t seed, std::uint64_t omega) const {
    rng r(seed, stream_id(stream_tag, omega));
    const std::vector<double> pm = model.posterior_mean();
    const double sd = std::sqrt(model.posterior_var());
    std::vector<double> theta(static_cast<std::size_t>(model.d));
    for (int c = 0; c < model.d; ++c) theta[c] = pm[c] + sd * r.normal();

    const double s = std::sqrt(model.likelihood_var);
    discrete_measure out;
    out.d = model.d;
    out.w.assign(static_cast<std::size_t>(n_atoms), 1.0 / static_cast<double>(n_atoms));
    out.x.resize(static_cast<std::size_t>(n_atoms) * model.d);
    if (scheme == atom_scheme::quantile) {
        for (int i = 0; i < n_atoms; ++i) {
            const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(n_atoms);
            out.x[static_cast<std::size_t>(i)] = theta[0] + s * normal_icdf(p);
        }
        return out;
    }
    for (int i = 0; i < n_atoms; ++i)
        for (int c = 0; c < model.d; ++c)
            out.x[static_cast<std::size_t>(i) * model.d + c] = theta[c] + s * r.normal();
    return out;
}

consistency_result consistency_experiment(const base_distribution& truth,
                                          const posterior_model& m0,
                                          const std::vector<int>& ns, int k,
                                          std::uint64_t seed, int workers, int n_atoms,
                                          int n_ref) {
    truth.validate();
    m0.validate();
    if (truth.kind != base_distribution::family::isotropic_gaussian)
        throw config_error("consistency_experiment: truth must be an isotropic Gaussian");
    if (truth.d != m0.d) throw config_error("consistency_experiment: dimension mismatch");
    if (std::abs(truth.sigma * truth.sigma - m0.likelihood_var) > 1e-12)
        throw config_error(
            "consistency_experiment: the analytic curve needs truth variance equal to the "
            "likelihood variance");
    if (ns.size() < 3) throw config_error("consistency_experiment: need at least 3 sizes");
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (ns[i] < 1) throw config_error("consistency_experiment: sizes must be >= 1");
        if (i > 0 && ns[i] <= ns[i - 1])
            throw config_error("consistency_experiment: sizes must be strictly increasing");
    }
    if (k < 2) throw config_error("consistency_experiment: need k >= 2 replications");
    if (n_atoms < 2 || n_ref < 2)
        throw config_error("consistency_experiment: atom counts must be >= 2");

    const discrete_measure ref = reference_discretization(truth, n_ref, seed);

    consistency_result out;
    double delta_sq = 0.0;
    for (int c = 0; c < m0.d; ++c) {
        const double diff = m0.prior_mean[c] - truth.mean[c];
        delta_sq += diff * diff;
    }

    for (int n : ns) {
        std::vector<double> vals(static_cast<std::size_t>(k));
        parallel_for_safe(k, workers, [&](int idx) {
            const std::uint64_t omega = static_cast<std::uint64_t>(idx) + 1;
            point_list data = sample_base(truth, n, seed, stream_id(kDataTag, omega));
            posterior_model mn = posterior_update(m0, data);
            posterior_sampler samp(mn, n_atoms, posterior_sampler::atom_scheme::automatic,
                                   kAtomTag);
            vals[static_cast<std::size_t>(idx)] = w2sq(samp.realize(seed, omega), ref);
        });
        rate_row row;
        row.n = n;
        mean_se(vals, row.mean, row.std_err);
        out.fit.rows.push_back(row);

        // Closed form: E_data[ d v_n + w^2 d s^2/n + (1-w)^2 |prior - truth|^2 ].
        posterior_model mn = m0;
        mn.n_obs = n;
        mn.data_mean.assign(static_cast<std::size_t>(m0.d), 0.0);
        const double vn = mn.posterior_var();
        const double nn = static_cast<double>(n);
        const double w = (nn / m0.likelihood_var) / (1.0 / m0.prior_var + nn / m0.likelihood_var);
        out.analytic.push_back(static_cast<double>(m0.d) * vn +
                               w * w * static_cast<double>(m0.d) * m0.likelihood_var / nn +
                               (1.0 - w) * (1.0 - w) * delta_sq);
    }

    const fit_result f = fit_loglog(out.fit.rows);
    out.fit.slope = f.slope;
    out.fit.intercept = f.intercept;
    out.fit.slope_ci_lo = f.slope_ci_lo;
    out.fit.slope_ci_hi = f.slope_ci_hi;

    // Discretization floor: atoms collapsed onto the truth center against the
    // dense truth reference (the n -> infinity limit of the comparison).
    posterior_sampler collapsed(m0, n_atoms, posterior_sampler::atom_scheme::automatic,
                                kAtomTag);
    out.floor = w2sq(collapsed.atoms_at(truth.mean, seed, 1), ref);
    out.fit.floor = out.floor;
    return out;
}

bayes_flow_result bayes_flow_experiment(const base_distribution& truth,
                                        const posterior_model& m0,
                                        const std::vector<int>& ns,
                                        const vector_field_spec& field, double dt, double T,
                                        int k, std::uint64_t seed, int workers, int n_atoms,
                                        int n_ref) {
    truth.validate();
    m0.validate();
    field.validate();
    if (truth.kind != base_distribution::family::isotropic_gaussian)
        throw config_error("bayes_flow_experiment: truth must be an isotropic Gaussian");
    if (truth.d != m0.d) throw config_error("bayes_flow_experiment: dimension mismatch");
    if (m0.d < 2) throw config_error("bayes_flow_experiment: sphere dynamics need d >= 2");
    if (ns.empty()) throw config_error("bayes_flow_experiment: no data sizes");
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (ns[i] < 1) throw config_error("bayes_flow_experiment: sizes must be >= 1");
        if (i > 0 && ns[i] <= ns[i - 1])
            throw config_error("bayes_flow_experiment: sizes must be strictly increasing");
    }
    if (k < 2) throw config_error("bayes_flow_experiment: need k >= 2 replications");
    if (n_atoms < 2 || n_ref < 2)
        throw config_error("bayes_flow_experiment: atom counts must be >= 2");
    if (!(dt > 0.0) || !(T > 0.0))
        throw config_error("bayes_flow_experiment: dt and T must be positive");

    // Snapshots at five evenly spaced times including 0 and T.
    const int stride = std::max(1, static_cast<int>(std::llround(T / (4.0 * dt))));
    const double L = lipschitz_L(field.beta);

    const auto normalize_rows = [](discrete_measure m) {
        particle_ensemble e;
        e.d = m.d;
        e.x = std::move(m.x);
        e.on_sphere = true;
        for (int i = 0; i < e.n(); ++i) {
            double* p = e.row(i);
            double s = 0.0;
            for (int c = 0; c < e.d; ++c) s += p[c] * p[c];
            const double norm = std::sqrt(s);
            if (norm < 1e-12)
                throw numerical_error("bayes_flow_experiment: atom too close to the origin");
            for (int c = 0; c < e.d; ++c) p[c] /= norm;
        }
        return e;
    };

    const particle_ensemble ref_e = normalize_rows(reference_discretization(truth, n_ref, seed));
    const flow_trajectory ref_traj = simulate(ref_e, field, dt, T, stride, workers);

    bayes_flow_result out;
    for (int n : ns) {
        std::vector<double> sups(static_cast<std::size_t>(k));
        std::vector<double> ratios(static_cast<std::size_t>(k));
        std::vector<char> oks(static_cast<std::size_t>(k), 0);
        parallel_for_safe(k, workers, [&](int idx) {
            const std::uint64_t omega = static_cast<std::uint64_t>(idx) + 1;
            point_list data = sample_base(truth, n, seed, stream_id(kFlowDataTag, omega));
            posterior_model mn = posterior_update(m0, data);
            posterior_sampler samp(mn, n_atoms, posterior_sampler::atom_scheme::iid,
                                   kFlowAtomTag);
            particle_ensemble e0 = normalize_rows(samp.realize(seed, omega));
            const flow_trajectory traj = simulate(e0, field, dt, T, stride, 1);
            const gronwall_report rep = gronwall_check(traj, ref_traj, L);
            double sup = 0.0;
            for (double v : rep.w2sq_at_t)
                if (v > sup) sup = v;
            sups[static_cast<std::size_t>(idx)] = sup;
            ratios[static_cast<std::size_t>(idx)] = rep.max_ratio;
            oks[static_cast<std::size_t>(idx)] = rep.satisfied ? 1 : 0;
        });
        bayes_flow_row row;
        row.n = n;
        mean_se(sups, row.mean_sup_w2sq, row.std_err);
        row.max_gronwall_ratio = 0.0;
        row.gronwall_satisfied = true;
        for (int idx = 0; idx < k; ++idx) {
            if (ratios[static_cast<std::size_t>(idx)] > row.max_gronwall_ratio)
                row.max_gronwall_ratio = ratios[static_cast<std::size_t>(idx)];
            if (!oks[static_cast<std::size_t>(idx)]) row.gronwall_satisfied = false;
        }
        out.rows.push_back(row);
    }

    posterior_sampler collapsed(m0, n_atoms, posterior_sampler::atom_scheme::iid, kFlowAtomTag);
    const particle_ensemble floor_e = normalize_rows(collapsed.atoms_at(truth.mean, seed, 1));
    out.floor = w2sq(floor_e.as_measure(), ref_e.as_measure());
    return out;
}

}  // namespace otrm
