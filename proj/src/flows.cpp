#include "otrm/flows.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <vector>

#include "otrm/errors.hpp"
#include "otrm/ot.hpp"
#include "otrm/parallel.hpp"

namespace otrm {

void particle_ensemble::validate() const {
    if (d < 1) throw config_error("particle_ensemble: dimension must be >= 1");
    if (x.empty() || static_cast<int>(x.size()) % d != 0)
        throw config_error("particle_ensemble: coordinate count not a multiple of d");
    for (double v : x)
        if (!std::isfinite(v)) throw config_error("particle_ensemble: non-finite coordinate");
    if (on_sphere) {
        for (int i = 0; i < n(); ++i) {
            const double* p = row(i);
            double s = 0.0;
            for (int c = 0; c < d; ++c) s += p[c] * p[c];
            if (std::abs(std::sqrt(s) - 1.0) > 1e-9)
                throw config_error("particle_ensemble: point off the unit sphere");
        }
    }
}

discrete_measure particle_ensemble::as_measure() const {
    discrete_measure m;
    m.d = d;
    const int cnt = n();
    m.w.assign(static_cast<std::size_t>(cnt), 1.0 / static_cast<double>(cnt));
    m.x = x;
    return m;
}

void vector_field_spec::validate() const {
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw config_error("vector_field_spec: beta must be positive and finite");
}

std::vector<double> project_tangent(const std::vector<double>& x,
                                    const std::vector<double>& v) {
    if (x.size() != v.size() || x.empty())
        throw config_error("project_tangent: size mismatch");
    double dot = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) dot += x[c] * v[c];
    std::vector<double> out(v.size());
    for (std::size_t c = 0; c < x.size(); ++c) out[c] = v[c] - dot * x[c];
    return out;
}

namespace {

// Shared kernel: per particle i, accumulate sum_j weight(beta <x_i, x_j>) x_j
// (softmax-normalized or plain exponential / n), then project tangentially.
std::vector<double> velocity_kernel(const particle_ensemble& e, double beta, bool softmax,
                                    int workers) {
    e.validate();
    const int cnt = e.n();
    const int d = e.d;
    std::vector<double> vel(static_cast<std::size_t>(cnt) * d);
    parallel_for(cnt, workers, [&](int i) {
        const double* xi = e.row(i);
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < cnt; ++j) {
            const double* xj = e.row(j);
            double dot = 0.0;
            for (int c = 0; c < d; ++c) dot += xi[c] * xj[c];
            if (beta * dot > mx) mx = beta * dot;
        }
        // Only shift the exponentials when they would otherwise overflow;
        // the common case stays bit-for-bit the textbook formula.
        const double shift = mx > 500.0 ? mx : 0.0;
        std::vector<double> acc(static_cast<std::size_t>(d), 0.0);
        double wsum = 0.0;
        for (int j = 0; j < cnt; ++j) {
            const double* xj = e.row(j);
            double dot = 0.0;
            for (int c = 0; c < d; ++c) dot += xi[c] * xj[c];
            const double w = std::exp(beta * dot - shift);
            wsum += w;
            for (int c = 0; c < d; ++c) acc[c] += w * xj[c];
        }
        const double scale = softmax ? 1.0 / wsum : std::exp(shift) / static_cast<double>(cnt);
        double proj = 0.0;
        for (int c = 0; c < d; ++c) proj += xi[c] * acc[c];
        proj *= scale;
        double* vi = vel.data() + static_cast<std::size_t>(i) * d;
        for (int c = 0; c < d; ++c) vi[c] = scale * acc[c] - proj * xi[c];
    });
    return vel;
}

}  // namespace

std::vector<double> velocity_usa(const particle_ensemble& e, double beta, int workers) {
    return velocity_kernel(e, beta, /*softmax=*/false, workers);
}

std::vector<double> velocity_sa(const particle_ensemble& e, double beta, int workers) {
    return velocity_kernel(e, beta, /*softmax=*/true, workers);
}

double interaction_energy(const particle_ensemble& e, double beta, int workers) {
    e.validate();
    if (!(beta > 0.0)) throw config_error("interaction_energy: beta must be positive");
    const int cnt = e.n();
    const int d = e.d;
    std::vector<double> rowsum(static_cast<std::size_t>(cnt), 0.0);
    parallel_for(cnt, workers, [&](int i) {
        const double* xi = e.row(i);
        double s = 0.0;
        for (int j = 0; j < cnt; ++j) {
            const double* xj = e.row(j);
            double dot = 0.0;
            for (int c = 0; c < d; ++c) dot += xi[c] * xj[c];
            s += std::exp(beta * dot);
        }
        rowsum[static_cast<std::size_t>(i)] = s;
    });
    double total = 0.0;
    for (double s : rowsum) total += s;
    const double nn = static_cast<double>(cnt);
    return total / (2.0 * beta * nn * nn);
}

particle_ensemble step(const particle_ensemble& e, const vector_field_spec& f, double dt,
                       int workers) {
    f.validate();
    if (!(dt > 0.0) || !std::isfinite(dt)) throw config_error("step: dt must be positive");
    const std::vector<double> vel =
        (f.kind == vector_field_spec::family::sa) ? velocity_sa(e, f.beta, workers)
                                                  : velocity_usa(e, f.beta, workers);
    particle_ensemble out = e;
    out.time = e.time + dt;
    const int cnt = e.n();
    const int d = e.d;
    for (int i = 0; i < cnt; ++i) {
        double* p = out.row(i);
        const double* v = vel.data() + static_cast<std::size_t>(i) * d;
        double s = 0.0;
        for (int c = 0; c < d; ++c) {
            p[c] += dt * v[c];
            s += p[c] * p[c];
        }
        if (e.on_sphere) {
            const double norm = std::sqrt(s);
            if (norm < 1e-12) throw numerical_error("step: particle collapsed to the origin");
            for (int c = 0; c < d; ++c) p[c] /= norm;
        }
    }
    return out;
}

flow_trajectory simulate(const particle_ensemble& e0, const vector_field_spec& f, double dt,
                         double t_end, int snapshot_stride, int workers) {
    e0.validate();
    f.validate();
    if (!(dt > 0.0) || !std::isfinite(dt)) throw config_error("simulate: dt must be positive");
    if (!(t_end >= 0.0) || !std::isfinite(t_end))
        throw config_error("simulate: t_end must be nonnegative");
    if (snapshot_stride < 1) throw config_error("simulate: snapshot_stride must be >= 1");
    if (f.beta * dt > 0.1 + 1e-12)
        throw guard_error("simulate: beta * dt exceeds 0.1 (explicit Euler unstable)");
    const double steps_real = t_end / dt;
    const long long nsteps = std::llround(steps_real);
    if (std::abs(static_cast<double>(nsteps) * dt - t_end) >
        1e-9 * std::max(1.0, std::abs(t_end)))
        throw config_error("simulate: t_end is not a whole number of steps");

    flow_trajectory traj;
    traj.dt = dt;
    traj.field = f;
    particle_ensemble cur = e0;
    traj.times.push_back(cur.time);
    traj.snapshots.push_back(cur);
    traj.energies.push_back(interaction_energy(cur, f.beta, workers));
    for (long long s = 1; s <= nsteps; ++s) {
        cur = step(cur, f, dt, workers);
        if (s % snapshot_stride == 0 || s == nsteps) {
            traj.times.push_back(cur.time);
            traj.snapshots.push_back(cur);
            traj.energies.push_back(interaction_energy(cur, f.beta, workers));
        }
    }
    return traj;
}

double lipschitz_L1(double beta) { return (beta + 1.0) * std::exp(beta); }

double lipschitz_L(double beta) {
    const double eb = std::exp(beta);
    return (beta + 1.0) * (beta + 1.0) * eb * eb + 1.0 + 2.0 * (beta + 2.0) * eb;
}

gronwall_report gronwall_check(const flow_trajectory& a, const flow_trajectory& b, double L) {
    if (a.times.empty() || a.times.size() != b.times.size())
        throw config_error("gronwall_check: trajectories have different snapshot counts");
    for (std::size_t t = 0; t < a.times.size(); ++t)
        if (std::abs(a.times[t] - b.times[t]) > 1e-9)
            throw config_error("gronwall_check: snapshot times differ");
    if (a.field.kind != b.field.kind || std::abs(a.field.beta - b.field.beta) > 1e-12)
        throw config_error("gronwall_check: trajectories evolved under different fields");
    if (!(L >= 0.0) || !std::isfinite(L))
        throw config_error("gronwall_check: L must be nonnegative");

    gronwall_report rep;
    rep.w2sq_at_t.reserve(a.times.size());
    for (std::size_t t = 0; t < a.times.size(); ++t)
        rep.w2sq_at_t.push_back(w2sq(a.snapshots[t].as_measure(), b.snapshots[t].as_measure()));

    const double base = rep.w2sq_at_t.front();
    if (base <= 0.0) {
        bool later = false;
        for (double v : rep.w2sq_at_t)
            if (v > 0.0) later = true;
        if (later) {
            rep.degenerate = true;
            rep.max_ratio = std::numeric_limits<double>::infinity();
            rep.satisfied = false;
        } else {
            rep.max_ratio = 0.0;
            rep.satisfied = true;
        }
        return rep;
    }
    for (std::size_t t = 0; t < a.times.size(); ++t) {
        const double elapsed = a.times[t] - a.times.front();
        const double ratio = rep.w2sq_at_t[t] / (std::exp(L * elapsed) * base);
        if (ratio > rep.max_ratio) rep.max_ratio = ratio;
    }
    rep.satisfied = rep.max_ratio <= 1.05;
    return rep;
}

particle_ensemble sphere_ensemble(int n, int d, std::uint64_t seed,
                                  std::uint64_t stream_index) {
    if (n < 1) throw config_error("sphere_ensemble: n must be >= 1");
    if (d < 2) throw config_error("sphere_ensemble: d must be >= 2");
    point_list pts = sample_base(base_distribution::sphere(d), n, seed, stream_index);
    particle_ensemble e;
    e.d = d;
    e.x = std::move(pts.xs);
    e.time = 0.0;
    e.on_sphere = true;
    return e;
}

}  // namespace otrm
