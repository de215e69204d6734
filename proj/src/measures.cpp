#include "otrm/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace otrm {

void discrete_measure::validate() const {
    if (d < 1) throw config_error("measure: dimension must be >= 1");
    if (w.empty()) throw config_error("measure: needs at least one atom");
    if (x.size() != w.size() * static_cast<std::size_t>(d))
        throw config_error("measure: coordinate array size does not match n*d");
    double total = 0.0;
    for (double wi : w) {
        if (!(wi >= 0.0)) throw config_error("measure: negative or NaN weight");
        total += wi;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw config_error("measure: weights sum to " + std::to_string(total) +
                           ", expected 1 within 1e-12");
    for (double xi : x)
        if (!std::isfinite(xi)) throw config_error("measure: non-finite coordinate");
}

double second_moment(const discrete_measure& m) {
    double s = 0.0;
    for (int i = 0; i < m.n(); ++i) {
        const double* p = m.point(i);
        double r2 = 0.0;
        for (int j = 0; j < m.d; ++j) r2 += p[j] * p[j];
        s += m.w[i] * r2;
    }
    return s;
}

std::vector<double> mean_point(const discrete_measure& m) {
    std::vector<double> mu(m.d, 0.0);
    for (int i = 0; i < m.n(); ++i) {
        const double* p = m.point(i);
        for (int j = 0; j < m.d; ++j) mu[j] += m.w[i] * p[j];
    }
    return mu;
}

discrete_measure empirical(const point_list& pts) {
    if (pts.xs.empty()) throw config_error("empirical: empty point list");
    discrete_measure m;
    m.d = pts.d;
    m.x = pts.xs;
    m.w.assign(pts.n(), 1.0 / pts.n());
    return m;
}

void base_distribution::validate() const {
    if (d < 1) throw config_error("distribution: dimension must be >= 1");
    switch (kind) {
        case family::uniform_cube:
            if (!(a < b)) throw config_error("uniform-cube: requires a < b");
            break;
        case family::isotropic_gaussian:
            if (!(sigma > 0.0)) throw config_error("isotropic-gaussian: sigma must be > 0");
            if (mean.size() != static_cast<std::size_t>(d))
                throw config_error("isotropic-gaussian: mean length must equal d");
            break;
        case family::gaussian_mixture: {
            std::size_t kc = mix_weights.size();
            if (kc == 0) throw config_error("gaussian-mixture: needs components");
            if (mix_sigmas.size() != kc || mix_means.size() != kc * d)
                throw config_error("gaussian-mixture: component arrays inconsistent");
            double tw = std::accumulate(mix_weights.begin(), mix_weights.end(), 0.0);
            if (std::abs(tw - 1.0) > 1e-12)
                throw config_error("gaussian-mixture: weights must sum to 1");
            for (double s : mix_sigmas)
                if (!(s > 0.0)) throw config_error("gaussian-mixture: sigma must be > 0");
            for (double wq : mix_weights)
                if (!(wq >= 0.0)) throw config_error("gaussian-mixture: negative weight");
            break;
        }
        case family::uniform_sphere:
            if (d < 2) throw config_error("uniform-sphere: requires d >= 2");
            break;
    }
}

base_distribution base_distribution::uniform_cube(double a, double b, int d) {
    base_distribution dist;
    dist.kind = family::uniform_cube;
    dist.a = a;
    dist.b = b;
    dist.d = d;
    dist.validate();
    return dist;
}

base_distribution base_distribution::gaussian(std::vector<double> mean, double sigma) {
    base_distribution dist;
    dist.kind = family::isotropic_gaussian;
    dist.d = static_cast<int>(mean.size());
    dist.mean = std::move(mean);
    dist.sigma = sigma;
    dist.validate();
    return dist;
}

base_distribution base_distribution::gaussian(int d, double sigma) {
    return gaussian(std::vector<double>(d, 0.0), sigma);
}

base_distribution base_distribution::mixture(std::vector<double> means,
                                             std::vector<double> sigmas,
                                             std::vector<double> weights, int d) {
    base_distribution dist;
    dist.kind = family::gaussian_mixture;
    dist.d = d;
    dist.mix_means = std::move(means);
    dist.mix_sigmas = std::move(sigmas);
    dist.mix_weights = std::move(weights);
    dist.validate();
    return dist;
}

base_distribution base_distribution::sphere(int d) {
    base_distribution dist;
    dist.kind = family::uniform_sphere;
    dist.d = d;
    dist.validate();
    return dist;
}

double second_moment(const base_distribution& dist) {
    switch (dist.kind) {
        case base_distribution::family::uniform_cube:
            return dist.d * (dist.a * dist.a + dist.a * dist.b + dist.b * dist.b) / 3.0;
        case base_distribution::family::isotropic_gaussian: {
            double m2 = dist.d * dist.sigma * dist.sigma;
            for (double mi : dist.mean) m2 += mi * mi;
            return m2;
        }
        case base_distribution::family::gaussian_mixture: {
            double m2 = 0.0;
            for (std::size_t c = 0; c < dist.mix_weights.size(); ++c) {
                double norm2 = 0.0;
                for (int j = 0; j < dist.d; ++j) {
                    double mj = dist.mix_means[c * dist.d + j];
                    norm2 += mj * mj;
                }
                m2 += dist.mix_weights[c] *
                      (norm2 + dist.d * dist.mix_sigmas[c] * dist.mix_sigmas[c]);
            }
            return m2;
        }
        case base_distribution::family::uniform_sphere:
            return 1.0;
    }
    throw config_error("second_moment: unknown distribution kind");
}

double sub_gaussian_constant(const base_distribution& dist) {
    switch (dist.kind) {
        case base_distribution::family::isotropic_gaussian:
            return dist.sigma;
        case base_distribution::family::uniform_cube:
            // Radius of the support ball around the cube center.
            return 0.5 * (dist.b - dist.a) * std::sqrt(static_cast<double>(dist.d));
        case base_distribution::family::uniform_sphere:
            return 1.0;
        case base_distribution::family::gaussian_mixture:
            throw config_error("sub_gaussian_constant: not defined for mixtures here");
    }
    throw config_error("sub_gaussian_constant: unknown distribution kind");
}

namespace {

void sample_one(const base_distribution& dist, rng& r, double* out) {
    switch (dist.kind) {
        case base_distribution::family::uniform_cube:
            for (int j = 0; j < dist.d; ++j) out[j] = r.uniform(dist.a, dist.b);
            return;
        case base_distribution::family::isotropic_gaussian:
            for (int j = 0; j < dist.d; ++j) out[j] = dist.mean[j] + dist.sigma * r.normal();
            return;
        case base_distribution::family::gaussian_mixture: {
            double u = r.u01();
            std::size_t c = 0;
            double acc = 0.0;
            for (; c + 1 < dist.mix_weights.size(); ++c) {
                acc += dist.mix_weights[c];
                if (u <= acc) break;
            }
            for (int j = 0; j < dist.d; ++j)
                out[j] = dist.mix_means[c * dist.d + j] + dist.mix_sigmas[c] * r.normal();
            return;
        }
        case base_distribution::family::uniform_sphere: {
            double norm2 = 0.0;
            do {
                norm2 = 0.0;
                for (int j = 0; j < dist.d; ++j) {
                    out[j] = r.normal();
                    norm2 += out[j] * out[j];
                }
            } while (norm2 < 1e-24);
            double inv = 1.0 / std::sqrt(norm2);
            for (int j = 0; j < dist.d; ++j) out[j] *= inv;
            return;
        }
    }
    throw config_error("sample_base: unknown distribution kind");
}

}  // namespace

point_list sample_base(const base_distribution& dist, int n, std::uint64_t seed,
                       std::uint64_t stream_index) {
    dist.validate();
    if (n < 1) throw config_error("sample_base: n must be >= 1");
    point_list pts;
    pts.d = dist.d;
    pts.xs.resize(static_cast<std::size_t>(n) * dist.d);
    rng r(seed, stream_index);
    for (int i = 0; i < n; ++i) sample_one(dist, r, pts.row(i));
    return pts;
}

point_list ar1_points(double rho, int n, int d, std::uint64_t seed,
                      std::uint64_t stream_index) {
    if (!(std::abs(rho) < 1.0)) throw config_error("ar1_points: requires |rho| < 1");
    if (n < 1 || d < 1) throw config_error("ar1_points: n and d must be >= 1");
    point_list pts;
    pts.d = d;
    pts.xs.resize(static_cast<std::size_t>(n) * d);
    rng r(seed, stream_index);
    double innovation = std::sqrt(1.0 - rho * rho);
    for (int j = 0; j < d; ++j) pts.xs[j] = r.normal();
    for (int i = 1; i < n; ++i) {
        const double* prev = pts.row(i - 1);
        double* cur = pts.row(i);
        for (int j = 0; j < d; ++j) cur[j] = rho * prev[j] + innovation * r.normal();
    }
    return pts;
}

discrete_measure mollify_sample(const discrete_measure& m, double sigma, int n_out,
                                std::uint64_t seed, std::uint64_t stream_index) {
    m.validate();
    if (!(sigma > 0.0)) throw config_error("mollify_sample: sigma must be > 0");
    if (n_out < 1) throw config_error("mollify_sample: n_out must be >= 1");
    std::vector<double> cum(m.w.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < m.w.size(); ++i) {
        acc += m.w[i];
        cum[i] = acc;
    }
    cum.back() = 1.0;
    discrete_measure out;
    out.d = m.d;
    out.w.assign(n_out, 1.0 / n_out);
    out.x.resize(static_cast<std::size_t>(n_out) * m.d);
    rng r(seed, stream_index);
    for (int i = 0; i < n_out; ++i) {
        double u = r.u01();
        int src = static_cast<int>(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
        const double* p = m.point(src);
        double* q = out.x.data() + static_cast<std::size_t>(i) * m.d;
        for (int j = 0; j < m.d; ++j) q[j] = p[j] + sigma * r.normal();
    }
    return out;
}

void mixing_spec::validate() const {
    if (kind == family::geometric && !(c > 0.0))
        throw config_error("mixing: geometric requires c > 0");
    if (kind == family::polynomial && !(theta > 0.0))
        throw config_error("mixing: polynomial requires theta > 0");
}

mixing_spec mixing_spec::iid() { return mixing_spec{}; }

mixing_spec mixing_spec::geometric(double c) {
    mixing_spec mix;
    mix.kind = family::geometric;
    mix.c = c;
    mix.validate();
    return mix;
}

mixing_spec mixing_spec::polynomial(double theta) {
    mixing_spec mix;
    mix.kind = family::polynomial;
    mix.theta = theta;
    mix.validate();
    return mix;
}

double c_alpha(const mixing_spec& mix, int n) {
    if (n < 1) throw config_error("c_alpha: n must be >= 1");
    mix.validate();
    switch (mix.kind) {
        case mixing_spec::family::iid:
            return 1.0;
        case mixing_spec::family::geometric: {
            // 2 sum_{k=1}^{n-1} q^k with q = e^{-c}, summed in closed form.
            double q = std::exp(-mix.c);
            return 1.0 + 2.0 * q * (1.0 - std::pow(q, n - 1)) / (1.0 - q);
        }
        case mixing_spec::family::polynomial: {
            double s = 0.0;
            for (int k = 1; k < n; ++k) s += std::pow(static_cast<double>(k), -mix.theta);
            return 1.0 + 2.0 * s;
        }
    }
    throw config_error("c_alpha: unknown mixing kind");
}

namespace {

// Inverse CDF of a 1D Gaussian mixture by bisection (CDF is strictly
// increasing; 200 halvings reach ~1e-60 interval width from any bracket).
double mixture_icdf_1d(const base_distribution& dist, double p) {
    double lo = -1.0, hi = 1.0;
    auto cdf = [&dist](double t) {
        double s = 0.0;
        for (std::size_t c = 0; c < dist.mix_weights.size(); ++c)
            s += dist.mix_weights[c] *
                 normal_cdf((t - dist.mix_means[c]) / dist.mix_sigmas[c]);
        return s;
    };
    while (cdf(lo) > p) lo = lo * 2.0 - 1.0;
    while (cdf(hi) < p) hi = hi * 2.0 + 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + std::abs(lo)); ++it) {
        double mid = 0.5 * (lo + hi);
        (cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

constexpr std::uint64_t kReferenceTag = 0x5245;  // stream tag for reference builds

}  // namespace

std::uint64_t stream_id(std::uint64_t tag, std::uint64_t omega) {
    return (tag << 40) + omega;
}

discrete_measure reference_discretization(const base_distribution& dist, int n,
                                          std::uint64_t seed) {
    dist.validate();
    if (n < 1) throw config_error("reference_discretization: n must be >= 1");
    discrete_measure m;
    m.d = dist.d;
    m.w.assign(n, 1.0 / n);
    m.x.resize(static_cast<std::size_t>(n) * dist.d);

    if (dist.d == 1) {
        for (int i = 0; i < n; ++i) {
            double p = (i + 0.5) / n;
            double v = 0.0;
            switch (dist.kind) {
                case base_distribution::family::uniform_cube:
                    v = dist.a + (dist.b - dist.a) * p;
                    break;
                case base_distribution::family::isotropic_gaussian:
                    v = dist.mean[0] + dist.sigma * normal_icdf(p);
                    break;
                case base_distribution::family::gaussian_mixture:
                    v = mixture_icdf_1d(dist, p);
                    break;
                case base_distribution::family::uniform_sphere:
                    throw config_error("reference_discretization: sphere needs d >= 2");
            }
            m.x[i] = v;
        }
        return m;
    }

    if (dist.kind == base_distribution::family::gaussian_mixture) {
        point_list pts = sample_base(dist, n, seed, stream_id(kReferenceTag, n));
        return empirical(pts);
    }

    // Latin hypercube: coordinate j of point i falls in stratum perm_j(i).
    rng r(seed, stream_id(kReferenceTag, n));
    std::vector<double> u(static_cast<std::size_t>(n) * dist.d);
    for (int j = 0; j < dist.d; ++j) {
        std::vector<int> perm = r.permutation(n);
        for (int i = 0; i < n; ++i)
            u[static_cast<std::size_t>(i) * dist.d + j] = (perm[i] + r.u01()) / n;
    }
    for (int i = 0; i < n; ++i) {
        double* row = m.x.data() + static_cast<std::size_t>(i) * dist.d;
        const double* ui = u.data() + static_cast<std::size_t>(i) * dist.d;
        switch (dist.kind) {
            case base_distribution::family::uniform_cube:
                for (int j = 0; j < dist.d; ++j)
                    row[j] = dist.a + (dist.b - dist.a) * ui[j];
                break;
            case base_distribution::family::isotropic_gaussian:
                for (int j = 0; j < dist.d; ++j)
                    row[j] = dist.mean[j] + dist.sigma * normal_icdf(ui[j]);
                break;
            case base_distribution::family::uniform_sphere: {
                double norm2 = 0.0;
                for (int j = 0; j < dist.d; ++j) {
                    row[j] = normal_icdf(ui[j]);
                    norm2 += row[j] * row[j];
                }
                double inv = 1.0 / std::sqrt(std::max(norm2, 1e-24));
                for (int j = 0; j < dist.d; ++j) row[j] *= inv;
                break;
            }
            case base_distribution::family::gaussian_mixture:
                break;  // handled above
        }
    }
    return m;
}

empirical_iid_sampler::empirical_iid_sampler(base_distribution base_, int n,
                                             std::uint64_t tag)
    : base(std::move(base_)), n_atoms(n), stream_tag(tag) {
    base.validate();
    if (n_atoms < 1) throw config_error("empirical sampler: n must be >= 1");
}

discrete_measure empirical_iid_sampler::realize(std::uint64_t seed,
                                                std::uint64_t omega) const {
    return empirical(sample_base(base, n_atoms, seed, stream_id(stream_tag, omega)));
}

empirical_ar1_sampler::empirical_ar1_sampler(double rho_, int n, int d_, std::uint64_t tag)
    : rho(rho_), n_atoms(n), d(d_), stream_tag(tag) {
    if (!(std::abs(rho) < 1.0)) throw config_error("ar1 sampler: requires |rho| < 1");
    if (n_atoms < 1 || d < 1) throw config_error("ar1 sampler: n and d must be >= 1");
}

discrete_measure empirical_ar1_sampler::realize(std::uint64_t seed,
                                                std::uint64_t omega) const {
    return empirical(ar1_points(rho, n_atoms, d, seed, stream_id(stream_tag, omega)));
}

mollified_sampler::mollified_sampler(discrete_measure source_, double sigma_, int n_out_,
                                     std::uint64_t tag)
    : source(std::move(source_)), sigma(sigma_), n_out(n_out_), stream_tag(tag) {
    source.validate();
    if (!(sigma > 0.0)) throw config_error("mollified sampler: sigma must be > 0");
    if (n_out < 1) throw config_error("mollified sampler: n_out must be >= 1");
}

discrete_measure mollified_sampler::realize(std::uint64_t seed, std::uint64_t omega) const {
    return mollify_sample(source, sigma, n_out, seed, stream_id(stream_tag, omega));
}

constant_sampler::constant_sampler(discrete_measure v) : value(std::move(v)) {
    value.validate();
}

}  // namespace otrm
