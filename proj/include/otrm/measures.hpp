#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "otrm/errors.hpp"
#include "otrm/rng.hpp"

namespace otrm {

// Flat row-major list of points in R^d (row i = coordinates of point i).
struct point_list {
    int d = 1;
    std::vector<double> xs;

    int n() const { return static_cast<int>(xs.size()) / d; }
    const double* row(int i) const { return xs.data() + static_cast<std::size_t>(i) * d; }
    double* row(int i) { return xs.data() + static_cast<std::size_t>(i) * d; }
};

// Finitely supported probability measure: atom i has weight w[i] and
// coordinates x[i*d .. i*d+d).
struct discrete_measure {
    int d = 1;
    std::vector<double> w;
    std::vector<double> x;

    int n() const { return static_cast<int>(w.size()); }
    const double* point(int i) const { return x.data() + static_cast<std::size_t>(i) * d; }

    // Checks weight normalization (sum within 1e-12 of 1), nonnegativity,
    // finiteness, and consistent sizes; throws config_error on violation.
    void validate() const;
};

double second_moment(const discrete_measure& m);
std::vector<double> mean_point(const discrete_measure& m);

discrete_measure empirical(const point_list& pts);

// Sampleable base distribution with closed-form moments.
struct base_distribution {
    enum class family { uniform_cube, isotropic_gaussian, gaussian_mixture, uniform_sphere };

    family kind = family::uniform_cube;
    int d = 1;
    double a = 0.0, b = 1.0;          // uniform-cube bounds per coordinate
    std::vector<double> mean;         // isotropic-gaussian mean (size d)
    double sigma = 1.0;               // isotropic-gaussian std dev
    std::vector<double> mix_means;    // mixture: k x d row-major
    std::vector<double> mix_sigmas;   // mixture: k
    std::vector<double> mix_weights;  // mixture: k, sums to 1

    void validate() const;

    static base_distribution uniform_cube(double a, double b, int d);
    static base_distribution gaussian(std::vector<double> mean, double sigma);
    static base_distribution gaussian(int d, double sigma = 1.0);  // zero mean
    static base_distribution mixture(std::vector<double> means, std::vector<double> sigmas,
                                     std::vector<double> weights, int d);
    static base_distribution sphere(int d);
};

// E[|X|^2] in closed form.
double second_moment(const base_distribution& dist);

// Sub-Gaussian constant used by concentration bounds: sigma for Gaussians,
// support radius for bounded families; throws config_error for mixtures.
double sub_gaussian_constant(const base_distribution& dist);

point_list sample_base(const base_distribution& dist, int n, std::uint64_t seed,
                       std::uint64_t stream_index);

// Stationary Gaussian AR(1) per coordinate: X_0 ~ N(0, I_d),
// X_{k+1} = rho X_k + sqrt(1 - rho^2) eps_k; marginals exactly N(0, I_d).
point_list ar1_points(double rho, int n, int d, std::uint64_t seed,
                      std::uint64_t stream_index);

// n_out i.i.d. draws from m * N(0, sigma^2 I_d) as a uniform empirical
// measure: sample an atom by weight, add Gaussian noise.
discrete_measure mollify_sample(const discrete_measure& m, double sigma, int n_out,
                                std::uint64_t seed, std::uint64_t stream_index);

// Strong-mixing accumulation C_alpha(n) = 1 + 2 sum_{k=1}^{n-1} alpha(k).
struct mixing_spec {
    enum class family { iid, geometric, polynomial };
    family kind = family::iid;
    double c = 1.0;      // geometric: alpha(k) = exp(-c k)
    double theta = 1.0;  // polynomial: alpha(k) = k^{-theta}

    void validate() const;

    static mixing_spec iid();
    static mixing_spec geometric(double c);
    static mixing_spec polynomial(double theta);
};

double c_alpha(const mixing_spec& mix, int n);

// Deterministic dense discretization of a base distribution, used as the
// fixed representative of the population measure. d=1 uses the exact
// quantile grid (midpoint rule through the inverse CDF); d>=2 uses Latin
// hypercube stratification pushed through per-coordinate inverse CDFs
// (mixtures fall back to i.i.d. sampling at the requested resolution).
discrete_measure reference_discretization(const base_distribution& dist, int n,
                                          std::uint64_t seed);

// A random measure: realize(seed, omega) is a pure function returning one
// realization; equal (seed, omega) across samplers = the shared probability
// space (realizations are coupled by construction). Samplers constructed
// with distinct stream_tag values are independent of each other.
struct random_measure_sampler {
    virtual ~random_measure_sampler() = default;
    virtual discrete_measure realize(std::uint64_t seed, std::uint64_t omega) const = 0;
    virtual int dim() const = 0;
    virtual std::string descriptor() const = 0;
};

// Combines a purpose tag with the replication index into a stream id so
// parallel omega-loops use disjoint counter streams.
std::uint64_t stream_id(std::uint64_t tag, std::uint64_t omega);

struct empirical_iid_sampler final : random_measure_sampler {
    base_distribution base;
    int n_atoms;
    std::uint64_t stream_tag;

    empirical_iid_sampler(base_distribution base_, int n, std::uint64_t tag = 0);
    discrete_measure realize(std::uint64_t seed, std::uint64_t omega) const override;
    int dim() const override { return base.d; }
    std::string descriptor() const override { return "empirical-iid"; }
};

struct empirical_ar1_sampler final : random_measure_sampler {
    double rho;
    int n_atoms;
    int d;
    std::uint64_t stream_tag;

    empirical_ar1_sampler(double rho_, int n, int d_, std::uint64_t tag = 0);
    discrete_measure realize(std::uint64_t seed, std::uint64_t omega) const override;
    int dim() const override { return d; }
    std::string descriptor() const override { return "empirical-ar1"; }
};

struct mollified_sampler final : random_measure_sampler {
    discrete_measure source;
    double sigma;
    int n_out;
    std::uint64_t stream_tag;

    mollified_sampler(discrete_measure source_, double sigma_, int n_out_,
                      std::uint64_t tag = 0);
    discrete_measure realize(std::uint64_t seed, std::uint64_t omega) const override;
    int dim() const override { return source.d; }
    std::string descriptor() const override { return "mollified"; }
};

// Realizes the same fixed measure at every omega (a deterministic point of
// the shared probability space, e.g. a dense population reference).
struct constant_sampler final : random_measure_sampler {
    discrete_measure value;

    explicit constant_sampler(discrete_measure v);
    discrete_measure realize(std::uint64_t, std::uint64_t) const override { return value; }
    int dim() const override { return value.d; }
    std::string descriptor() const override { return "constant"; }
};

}  // namespace otrm
