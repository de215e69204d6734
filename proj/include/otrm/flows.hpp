#pragma once

#include <cstdint>
#include <vector>

#include "otrm/measures.hpp"

namespace otrm {

// Uniform-weight particle configuration, optionally constrained to the
// unit sphere S^{d-1}.
struct particle_ensemble {
    int d = 2;
    std::vector<double> x;  // n x d row-major
    double time = 0.0;
    bool on_sphere = true;

    int n() const { return static_cast<int>(x.size()) / d; }
    const double* row(int i) const { return x.data() + static_cast<std::size_t>(i) * d; }
    double* row(int i) { return x.data() + static_cast<std::size_t>(i) * d; }

    void validate() const;  // unit norms within 1e-9 when on_sphere
    discrete_measure as_measure() const;
};

struct vector_field_spec {
    enum class family { usa, sa };
    family kind = family::usa;
    double beta = 1.0;

    void validate() const;
};

struct flow_trajectory {
    std::vector<double> times;
    std::vector<particle_ensemble> snapshots;  // aligned with times
    std::vector<double> energies;              // aligned with times
    double dt = 0.0;
    vector_field_spec field;
};

// Tangential projection v - <x,v> x at a unit vector x.
std::vector<double> project_tangent(const std::vector<double>& x,
                                    const std::vector<double>& v);

// Un-normalized self-attention field:
// v_i = P_perp_{x_i}( (1/n) sum_j e^{beta <x_i,x_j>} x_j ).
// Parallel over particles; deterministic for any worker count.
std::vector<double> velocity_usa(const particle_ensemble& e, double beta, int workers = 1);

// Softmax-normalized self-attention field:
// v_i = P_perp_{x_i}( sum_j softmax_j(beta <x_i,x_.>) x_j ).
std::vector<double> velocity_sa(const particle_ensemble& e, double beta, int workers = 1);

// Interaction energy (1/(2 beta n^2)) sum_{i,j} e^{beta <x_i,x_j>}.
double interaction_energy(const particle_ensemble& e, double beta, int workers = 1);

// Projected explicit Euler: x <- normalize(x + dt v); advances time by dt.
particle_ensemble step(const particle_ensemble& e, const vector_field_spec& f, double dt,
                       int workers = 1);

// Iterated steps with energy recorded every snapshot_stride steps (and at
// the final time). Guards beta*dt <= 0.1 against exponential blow-up.
flow_trajectory simulate(const particle_ensemble& e0, const vector_field_spec& f, double dt,
                         double t_end, int snapshot_stride, int workers = 1);

// Stability constant (beta+1)^2 e^{2 beta} + 1 + 2 (beta+2) e^beta.
double lipschitz_L(double beta);
// First component (beta+1) e^beta, exposed for diagnostics.
double lipschitz_L1(double beta);

struct gronwall_report {
    double max_ratio = 0.0;  // max over t of W2^2(t) / (e^{L t} W2^2(0))
    bool satisfied = false;  // max_ratio <= 1.05
    bool degenerate = false; // W2^2(0) = 0 but a later distance is not
    std::vector<double> w2sq_at_t;
};

// Exponential-envelope check between two trajectories with matching
// snapshot times and field.
gronwall_report gronwall_check(const flow_trajectory& a, const flow_trajectory& b, double L);

// n points on S^{d-1}: i.i.d. uniform draws (normalized Gaussians).
particle_ensemble sphere_ensemble(int n, int d, std::uint64_t seed, std::uint64_t stream_index);

}  // namespace otrm
