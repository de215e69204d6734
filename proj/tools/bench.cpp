// Benchmark comparing the serial reference path (workers = 1) against the
// OpenMP path on the hot kernels. Usage: otrm-bench [n] [workers].
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "otrm/flows.hpp"
#include "otrm/l2w.hpp"
#include "otrm/measures.hpp"
#include "otrm/parallel.hpp"

namespace {

using clock_type = std::chrono::steady_clock;

template <class F>
double time_ms(F&& body, int repeats) {
    const auto start = clock_type::now();
    for (int r = 0; r < repeats; ++r) body();
    const auto stop = clock_type::now();
    return std::chrono::duration<double, std::milli>(stop - start).count() /
           static_cast<double>(repeats);
}

void report(const char* name, double serial_ms, double parallel_ms, int workers) {
    std::printf("%-28s %10.2f ms %10.2f ms %8.2fx  (workers=%d)\n", name, serial_ms,
                parallel_ms, serial_ms / parallel_ms, workers);
}

}  // namespace

int main(int argc, char** argv) {
    const int n = argc > 1 ? std::atoi(argv[1]) : 2048;
    const int workers = argc > 2 ? std::atoi(argv[2]) : otrm::hardware_workers();
    const std::uint64_t seed = 20250819;

    std::printf("kernel                            serial    parallel    speedup\n");

    otrm::particle_ensemble e = otrm::sphere_ensemble(n, 3, seed, 1);
    {
        volatile double sink = 0.0;
        const double s = time_ms([&] { sink = sink + otrm::velocity_usa(e, 1.0, 1)[0]; }, 3);
        const double p = time_ms([&] { sink = sink + otrm::velocity_usa(e, 1.0, workers)[0]; }, 3);
        report("velocity_usa", s, p, workers);
    }
    {
        volatile double sink = 0.0;
        const double s = time_ms([&] { sink = sink + otrm::interaction_energy(e, 1.0, 1); }, 3);
        const double p = time_ms([&] { sink = sink + otrm::interaction_energy(e, 1.0, workers); }, 3);
        report("interaction_energy", s, p, workers);
    }
    {
        otrm::base_distribution base = otrm::base_distribution::gaussian(3, 1.0);
        otrm::empirical_iid_sampler a(base, 256, 1);
        otrm::empirical_iid_sampler b(base, 256, 2);
        volatile double sink = 0.0;
        const double s =
            time_ms([&] { sink = sink + otrm::estimate_d(a, b, 16, seed, 1).mean_w2_sq; }, 1);
        const double p =
            time_ms([&] { sink = sink + otrm::estimate_d(a, b, 16, seed, workers).mean_w2_sq; }, 1);
        report("estimate_d k=16 n=256", s, p, workers);
    }
    return 0;
}
