// Timing harness comparing the serial reference kernels against the
// OpenMP production paths:
//   1. reduced-system Jacobi sweeps (sliding-window reference vs block-scan),
//   2. Monte Carlo batches with 1 worker vs all cores.
// --smoke shrinks everything so the binary can run as a fast sanity test.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "blelat/markov.hpp"
#include "blelat/sim.hpp"

using namespace blelat;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void bench_solver(bool smoke) {
    ScenarioParams params;
    if (smoke) params = ScenarioParams{10, 5, 2'000, 500, 1};
    const Geometry g = derive_geometry(params);
    const Dra mode = smoke ? dra_from_aip(1'100, 200, 5) : dra_from_aip(170'000, 10'000, 5);
    const ChainSpec chain = chain_spec(mode, params.unit);
    const auto sys = kernels::build_reduced_system(chain, g);

    const int sweeps = smoke ? 20 : 50;
    std::vector<double> nu(static_cast<std::size_t>(g.cycle), 0.0);
    std::vector<double> nu_next(nu);
    kernels::SweepWorkspace ws;

    std::printf("solver: cycle=%lld window=%lld m=%d sweeps=%d\n",
                static_cast<long long>(g.cycle), static_cast<long long>(sys.window), chain.m, sweeps);

    auto t0 = Clock::now();
    for (int i = 0; i < sweeps; ++i) {
        kernels::jacobi_sweep_reference(sys, nu, nu_next, ws);
        nu.swap(nu_next);
    }
    const double t_ref = seconds_since(t0);
    std::vector<double> nu_ref = nu;

    std::fill(nu.begin(), nu.end(), 0.0);
    t0 = Clock::now();
    for (int i = 0; i < sweeps; ++i) {
        kernels::jacobi_sweep(sys, nu, nu_next, ws, 0);
        nu.swap(nu_next);
    }
    const double t_omp = seconds_since(t0);

    double max_delta = 0.0;
    for (std::size_t i = 0; i < nu.size(); ++i)
        max_delta = std::max(max_delta, std::abs(nu[i] - nu_ref[i]));

    std::printf("  reference (serial)   %8.2f ms/sweep\n", 1e3 * t_ref / sweeps);
    std::printf("  block-scan (%d thr)   %8.2f ms/sweep   speedup %.2fx   max|delta| %.3g\n",
                max_threads(), 1e3 * t_omp / sweeps, t_ref / t_omp, max_delta);
}

void bench_sim(bool smoke) {
    SimScenario sc;
    sc.seed = 7;
    sc.target = dra_from_aip(170'000, 10'000, 5);
    const std::int64_t n_advs = smoke ? 5 : 50;
    const usec choices[3] = {100'000, 170'000, 250'000};
    for (std::int64_t i = 0; i < n_advs; ++i)
        sc.surrounding.push_back(dra_from_aip(choices[i % 3], 10'000, 5));
    const std::int64_t runs = smoke ? 500 : 20'000;

    std::printf("sim: %lld surrounding advertisers, %lld runs\n", static_cast<long long>(n_advs),
                static_cast<long long>(runs));

    auto t0 = Clock::now();
    const BatchStats serial = simulate_batch(sc, runs, 1);
    const double t_serial = seconds_since(t0);

    t0 = Clock::now();
    const BatchStats parallel = simulate_batch(sc, runs, 0);
    const double t_par = seconds_since(t0);

    const bool identical = serial.discovered == parallel.discovered &&
                           serial.mean_latency_us == parallel.mean_latency_us &&
                           serial.ci95_halfwidth_us == parallel.ci95_halfwidth_us;

    std::printf("  1 worker             %8.0f runs/s\n", runs / t_serial);
    std::printf("  %d workers            %8.0f runs/s   speedup %.2fx   stats identical: %s\n",
                max_threads(), runs / t_par, t_serial / t_par, identical ? "yes" : "NO");
    if (!identical) std::exit(1);
}

}  // namespace

int main(int argc, char** argv) {
    bool smoke = false;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--smoke") == 0) smoke = true;
    bench_solver(smoke);
    bench_sim(smoke);
    return 0;
}
