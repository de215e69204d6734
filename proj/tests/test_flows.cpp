#include "doctest.h"
#include "otrm/flows.hpp"
#include "otrm/ot.hpp"

#include <cmath>
#include <vector>

using namespace otrm;

namespace {

particle_ensemble two_particles_2d(double x1a, double x1b, double x2a, double x2b) {
    particle_ensemble e;
    e.d = 2;
    e.x = {x1a, x1b, x2a, x2b};
    return e;
}

double diff_norm(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("project_tangent") {
    std::vector<double> x = {1.0, 0.0};
    std::vector<double> v = {3.0, 4.0};
    auto p = project_tangent(x, v);
    CHECK(p[0] == 0.0);
    CHECK(p[1] == 4.0);
    CHECK_THROWS_AS(project_tangent(x, std::vector<double>{1.0}), config_error);
}

TEST_CASE("two-particle velocity has the closed form") {
    particle_ensemble e = two_particles_2d(1, 0, 0, 1);
    auto v = velocity_usa(e, 1.0);
    // v_1 = P_perp((e^b x1 + x2)/2) = (0, 1/2); exact because the parallel
    // component cancels identically.
    CHECK(v[0] == 0.0);
    CHECK(v[1] == 0.5);
    CHECK(v[2] == 0.5);
    CHECK(v[3] == 0.0);
}

TEST_CASE("clustered and antipodal configurations are stationary") {
    particle_ensemble cluster;
    cluster.d = 3;
    for (int i = 0; i < 4; ++i) cluster.x.insert(cluster.x.end(), {1.0, 0.0, 0.0});
    for (double vi : velocity_usa(cluster, 1.0)) CHECK(vi == 0.0);
    for (double vi : velocity_sa(cluster, 1.0)) CHECK(vi == 0.0);

    particle_ensemble anti = two_particles_2d(1, 0, -1, 0);
    for (double vi : velocity_usa(anti, 1.0)) CHECK(vi == 0.0);
}

TEST_CASE("closed-form interaction energies") {
    particle_ensemble cluster;
    cluster.d = 3;
    for (int i = 0; i < 4; ++i) cluster.x.insert(cluster.x.end(), {1.0, 0.0, 0.0});
    CHECK(interaction_energy(cluster, 1.0) ==
          doctest::Approx(std::exp(1.0) / 2.0).epsilon(1e-15));

    particle_ensemble anti = two_particles_2d(1, 0, -1, 0);
    double expect = (std::exp(1.0) + std::exp(-1.0)) / 4.0;
    CHECK(interaction_energy(anti, 1.0) == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("softmax field matches a manual computation") {
    particle_ensemble e = sphere_ensemble(3, 2, 77, 1);
    const double beta = 1.3;
    auto v = velocity_sa(e, beta);
    for (int i = 0; i < 3; ++i) {
        double z = 0.0;
        std::vector<double> acc(2, 0.0);
        for (int j = 0; j < 3; ++j) {
            double s = e.row(i)[0] * e.row(j)[0] + e.row(i)[1] * e.row(j)[1];
            double w = std::exp(beta * s);
            z += w;
            acc[0] += w * e.row(j)[0];
            acc[1] += w * e.row(j)[1];
        }
        acc[0] /= z;
        acc[1] /= z;
        double dot = e.row(i)[0] * acc[0] + e.row(i)[1] * acc[1];
        CHECK(std::abs(v[2 * i] - (acc[0] - dot * e.row(i)[0])) <= 1e-14);
        CHECK(std::abs(v[2 * i + 1] - (acc[1] - dot * e.row(i)[1])) <= 1e-14);
    }
}

TEST_CASE("softmax and un-normalized fields agree as beta -> 0") {
    particle_ensemble e = sphere_ensemble(16, 3, 5, 2);
    auto vu = velocity_usa(e, 1e-6);
    auto vs = velocity_sa(e, 1e-6);
    for (std::size_t i = 0; i < vu.size(); ++i) CHECK(std::abs(vu[i] - vs[i]) <= 1e-5);
}

TEST_CASE("energy ascends along the flow and norms stay unit") {
    particle_ensemble e0 = sphere_ensemble(32, 3, 21, 3);
    vector_field_spec f;
    f.kind = vector_field_spec::family::usa;
    f.beta = 1.0;
    flow_trajectory traj = simulate(e0, f, 0.1, 10.0, 1);
    REQUIRE(traj.energies.size() == 101);
    for (std::size_t k = 0; k + 1 < traj.energies.size(); ++k)
        CHECK(traj.energies[k + 1] >= traj.energies[k] - 1e-8);
    const particle_ensemble& last = traj.snapshots.back();
    for (int i = 0; i < last.n(); ++i) {
        double r2 = 0.0;
        for (int j = 0; j < 3; ++j) r2 += last.row(i)[j] * last.row(i)[j];
        CHECK(std::abs(std::sqrt(r2) - 1.0) <= 1e-12);
    }
    CHECK(last.time == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("projected Euler converges at first order") {
    particle_ensemble e0 = sphere_ensemble(12, 3, 9, 4);
    vector_field_spec f;
    f.beta = 1.0;
    const int big_stride = 1 << 20;
    auto x1 = simulate(e0, f, 0.05, 0.5, big_stride).snapshots.back().x;
    auto x2 = simulate(e0, f, 0.025, 0.5, big_stride).snapshots.back().x;
    auto x3 = simulate(e0, f, 0.0125, 0.5, big_stride).snapshots.back().x;
    double ratio = diff_norm(x1, x2) / diff_norm(x2, x3);
    CHECK(ratio > 1.5);
    CHECK(ratio < 2.5);
}

TEST_CASE("simulate guards and snapshot schedule") {
    particle_ensemble e0 = sphere_ensemble(4, 3, 1, 5);
    vector_field_spec f;
    f.beta = 1.0;
    CHECK_THROWS_AS(simulate(e0, f, 0.2, 1.0, 1), guard_error);       // beta*dt too big
    CHECK_THROWS_AS(simulate(e0, f, 0.1, 0.35, 1), config_error);     // not whole steps
    CHECK_THROWS_AS(simulate(e0, f, -0.1, 1.0, 1), config_error);

    flow_trajectory traj = simulate(e0, f, 0.1, 1.0, 3);
    REQUIRE(traj.times.size() == 5);  // t = 0, 0.3, 0.6, 0.9, 1.0
    CHECK(traj.times[0] == 0.0);
    CHECK(traj.times[1] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(traj.times[3] == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(traj.times[4] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(traj.snapshots.size() == traj.times.size());
    CHECK(traj.energies.size() == traj.times.size());
}

TEST_CASE("field validation") {
    vector_field_spec f;
    f.beta = -1.0;
    CHECK_THROWS_AS(f.validate(), config_error);
    particle_ensemble off = two_particles_2d(1.1, 0, 0, 1);
    CHECK_THROWS_AS(off.validate(), config_error);
    off.on_sphere = false;
    CHECK_NOTHROW(off.validate());
}

TEST_CASE("velocity is the tangential energy gradient (finite differences)") {
    particle_ensemble e = sphere_ensemble(6, 3, 33, 6);
    const double beta = 1.0;
    auto v = velocity_usa(e, beta);
    const double h = 1e-5;
    const int n = e.n();
    for (int i = 0; i < n; ++i) {
        // Two tangent directions at x_i by Gram-Schmidt on coordinate axes.
        for (int axis = 0; axis < 2; ++axis) {
            std::vector<double> u(3, 0.0);
            u[axis] = 1.0;
            double dot = 0.0;
            for (int j = 0; j < 3; ++j) dot += u[j] * e.row(i)[j];
            for (int j = 0; j < 3; ++j) u[j] -= dot * e.row(i)[j];
            double norm = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
            if (norm < 1e-6) continue;
            for (double& uj : u) uj /= norm;

            particle_ensemble plus = e, minus = e;
            plus.on_sphere = minus.on_sphere = false;
            for (int j = 0; j < 3; ++j) {
                plus.row(i)[j] += h * u[j];
                minus.row(i)[j] -= h * u[j];
            }
            double g_fd = (interaction_energy(plus, beta) -
                           interaction_energy(minus, beta)) / (2.0 * h);
            double g_an = 0.0;  // <v_i, u> / n equals the ambient derivative
            for (int j = 0; j < 3; ++j) g_an += v[3 * i + j] * u[j];
            g_an /= n;
            CHECK(std::abs(g_an - g_fd) <= 1e-4 * std::max(1.0, std::abs(g_fd)));
        }
    }
}

TEST_CASE("permutation and rotation equivariance") {
    particle_ensemble e = sphere_ensemble(10, 3, 55, 7);
    const double beta = 1.0;
    auto v = velocity_usa(e, beta);

    particle_ensemble perm = e;
    std::vector<int> order = {3, 1, 4, 0, 9, 2, 6, 8, 7, 5};
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 3; ++j) perm.row(i)[j] = e.row(order[i])[j];
    auto vp = velocity_usa(perm, beta);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(std::abs(vp[3 * i + j] - v[3 * order[i] + j]) <= 1e-10);

    // Rotation about the z axis.
    const double c = std::cos(0.7), s = std::sin(0.7);
    auto rot = [&](const double* p, double* q) {
        q[0] = c * p[0] - s * p[1];
        q[1] = s * p[0] + c * p[1];
        q[2] = p[2];
    };
    particle_ensemble re = e;
    for (int i = 0; i < 10; ++i) rot(e.row(i), re.row(i));
    auto vr = velocity_usa(re, beta);
    for (int i = 0; i < 10; ++i) {
        double want[3];
        rot(&v[3 * i], want);
        for (int j = 0; j < 3; ++j) CHECK(std::abs(vr[3 * i + j] - want[j]) <= 1e-10);
    }
}

TEST_CASE("a step pulls a non-degenerate pair together") {
    particle_ensemble e = two_particles_2d(1, 0, 0, 1);
    vector_field_spec f;
    f.beta = 1.0;
    particle_ensemble next = step(e, f, 0.05);
    double before = 0.0, after = 0.0;
    for (int j = 0; j < 2; ++j) {
        before += e.row(0)[j] * e.row(1)[j];
        after += next.row(0)[j] * next.row(1)[j];
    }
    CHECK(after > before);
    CHECK(next.time == doctest::Approx(0.05).epsilon(1e-15));
}

TEST_CASE("gronwall_check") {
    vector_field_spec f;
    f.beta = 1.0;
    const double L = lipschitz_L(1.0);

    particle_ensemble a0 = sphere_ensemble(8, 3, 3, 8);
    flow_trajectory ta = simulate(a0, f, 0.05, 1.0, 5);

    SUBCASE("identical trajectories") {
        gronwall_report rep = gronwall_check(ta, ta, L);
        CHECK(rep.satisfied);
        CHECK_FALSE(rep.degenerate);
        CHECK(rep.max_ratio == 0.0);
        for (double w : rep.w2sq_at_t) CHECK(w == 0.0);
    }

    SUBCASE("perturbed start stays inside the envelope") {
        particle_ensemble b0 = a0;
        b0.x[0] += 1e-4;
        double norm = 0.0;
        for (int j = 0; j < 3; ++j) norm += b0.row(0)[j] * b0.row(0)[j];
        norm = std::sqrt(norm);
        for (int j = 0; j < 3; ++j) b0.row(0)[j] /= norm;
        flow_trajectory tb = simulate(b0, f, 0.05, 1.0, 5);
        gronwall_report rep = gronwall_check(ta, tb, L);
        CHECK(rep.satisfied);
        CHECK(rep.max_ratio <= 1.05);
        CHECK(rep.w2sq_at_t.front() > 0.0);
    }

    SUBCASE("unstable antipodal pair escapes a flat envelope") {
        particle_ensemble anti = two_particles_2d(1, 0, -1, 0);
        flow_trajectory fixed = simulate(anti, f, 0.05, 2.0, 8);
        const double theta = 1e-3;
        particle_ensemble tilt = two_particles_2d(1, 0, -std::cos(theta), -std::sin(theta));
        flow_trajectory moving = simulate(tilt, f, 0.05, 2.0, 8);
        gronwall_report rep = gronwall_check(fixed, moving, 0.0);
        CHECK_FALSE(rep.satisfied);
        CHECK(rep.max_ratio > 1.05);
        CHECK_FALSE(rep.degenerate);
    }

    SUBCASE("zero initial distance with later separation is degenerate") {
        flow_trajectory x, y;
        x.field = y.field = f;
        x.dt = y.dt = 0.1;
        particle_ensemble p = two_particles_2d(1, 0, 0, 1);
        particle_ensemble q = two_particles_2d(1, 0, 0, -1);
        x.times = {0.0, 0.1};
        y.times = {0.0, 0.1};
        x.snapshots = {p, p};
        y.snapshots = {p, q};
        x.energies = y.energies = {0.0, 0.0};
        gronwall_report rep = gronwall_check(x, y, L);
        CHECK(rep.degenerate);
        CHECK_FALSE(rep.satisfied);
        CHECK(std::isinf(rep.max_ratio));
    }

    SUBCASE("mismatched trajectories are rejected") {
        flow_trajectory tb = simulate(a0, f, 0.05, 0.5, 5);
        CHECK_THROWS_AS(gronwall_check(ta, tb, L), config_error);
        vector_field_spec g;
        g.beta = 2.0;
        flow_trajectory tc = simulate(a0, g, 0.05, 1.0, 5);
        CHECK_THROWS_AS(gronwall_check(ta, tc, L), config_error);
        CHECK_THROWS_AS(gronwall_check(ta, ta, -1.0), config_error);
    }
}

TEST_CASE("sphere_ensemble") {
    particle_ensemble e = sphere_ensemble(20, 4, 11, 9);
    CHECK(e.n() == 20);
    CHECK(e.on_sphere);
    e.validate();
    particle_ensemble again = sphere_ensemble(20, 4, 11, 9);
    CHECK(e.x == again.x);
    CHECK_THROWS_AS(sphere_ensemble(0, 3, 1, 1), config_error);
    CHECK_THROWS_AS(sphere_ensemble(5, 1, 1, 1), config_error);
}

TEST_CASE("worker count never changes results") {
    particle_ensemble e = sphere_ensemble(40, 3, 13, 10);
    auto v1 = velocity_usa(e, 1.0, 1);
    auto v4 = velocity_usa(e, 1.0, 4);
    CHECK(v1 == v4);
    auto s1 = velocity_sa(e, 1.0, 1);
    auto s4 = velocity_sa(e, 1.0, 4);
    CHECK(s1 == s4);
    CHECK(interaction_energy(e, 1.0, 1) == interaction_energy(e, 1.0, 4));
    vector_field_spec f;
    f.beta = 1.0;
    auto t1 = simulate(e, f, 0.1, 1.0, 2, 1);
    auto t4 = simulate(e, f, 0.1, 1.0, 2, 4);
    CHECK(t1.snapshots.back().x == t4.snapshots.back().x);
    CHECK(t1.energies == t4.energies);
}

TEST_CASE("stability constants") {
    const double e1 = std::exp(1.0);
    CHECK(lipschitz_L(1.0) ==
          doctest::Approx(4.0 * e1 * e1 + 1.0 + 6.0 * e1).epsilon(1e-15));
    CHECK(lipschitz_L1(1.0) == doctest::Approx(2.0 * e1).epsilon(1e-15));
}
