#pragma once

#include <cstdint>
#include <vector>

#include "otrm/ot.hpp"
#include "otrm/stats_types.hpp"

namespace otrm {

struct geodesic_path {
    discrete_measure source;
    discrete_measure target;
    coupling plan;
    std::vector<double> t_grid;  // strictly increasing, within [0,1]

    void validate() const;
};

// Displacement interpolation: pushforward of the coupling under
// (x, y) -> (1-t) x + t y; one atom per coupling entry.
discrete_measure interpolate(const transport_result& res, double t);

// Max over grid pairs (s,t) of
// |W2(eta_s, eta_t) - |s-t| W2(eta_0, eta_1)| / W2(eta_0, eta_1).
// Throws config_error if the endpoints coincide (degenerate path).
double constant_speed_error(const geodesic_path& path);

// Total kinetic energy of the straight-line particle trajectories,
// sum of mass * |x_i - y_j|^2; equals cost2 for the optimal plan.
double kinetic_energy(const transport_result& res);

// Convergence of empirical interpolants to a reference interpolant:
// for each n, Monte-Carlo mean over omega of
// sup_{t in grid} W2^2(eta_t^n(omega), eta_t^ref), plus a log-log fit.
rate_fit interpolant_convergence(const discrete_measure& mu_ref,
                                 const discrete_measure& nu_ref,
                                 const base_distribution& base_mu,
                                 const base_distribution& base_nu,
                                 const std::vector<int>& ns,
                                 const std::vector<double>& t_grid, int k,
                                 std::uint64_t seed, int workers = 1);

}  // namespace otrm
