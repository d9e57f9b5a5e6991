#pragma once

#include <cstdint>
#include <vector>

#include "blelat/timing.hpp"

namespace blelat {

// --- The offset/mode-index chain ---------------------------------------------
//
// Sample the system once per advertising interval. The state is (x, y): x the
// event's time offset in [0, cycle), y the mode index in [0, m). A state is
// absorbing exactly when classify_offset(x) is absorbing, independent of y.
// From a transient state:
//
//   y != 0:  one successor  ((x + ta)        mod cycle, (y+1) mod m)
//   y == 0:  r+1 successors ((x + t_ell + j) mod cycle, (y+1) mod m),
//            j = 0..r, each with probability 1/(r+1).
//
// mu[(x,y)] is the expected number of transitions to absorption:
// 0 on absorbing states, 1 + sum p * mu[successor] on transient ones.

struct MarkovState {
    std::int64_t x;
    int y;
};

/// Successor set of a state: `count` consecutive offsets starting at base_x
/// (mod cycle), all with mode index y and probability 1/count each.
struct SuccessorFan {
    std::int64_t base_x;
    std::int64_t count;
    int y;
};

/// Chain parameters in model units. ta is unused when m == 1 (there are no
/// fixed-interval steps); aip_us is the mean interval in microseconds and is
/// the time scale that turns transition counts into latency.
struct ChainSpec {
    std::int64_t ta = 0;
    std::int64_t t_ell = 0;
    std::int64_t r = 0;
    int m = 1;
    double aip_us = 0.0;
};

ChainSpec chain_spec(const Dra& mode, usec unit);
ChainSpec chain_spec(const Rda& mode, usec unit);

/// Transition rule above for any advertising mode (PDA and RDA behave as
/// m = 1 chains with a single mode index). Callers are expected to pass
/// transient states; pushing an absorbing state forward "as if transient" is
/// deliberate in the collided-state analysis and uses the same rule.
SuccessorFan successors(MarkovState s, const AdvMode& mode, const Geometry& g);
SuccessorFan successors(MarkovState s, const ChainSpec& chain, const Geometry& g);

struct SolverConfig {
    enum class Method {
        DirectDense,     // explicit dense linear solve; tiny instances only
        IterativeBanded  // reduced windowed Jacobi iteration; production
    };

    double tolerance = 1e-10;            // relative sup-norm residual target
    std::int64_t max_iterations = 1'000'000;
    Method method = Method::IterativeBanded;
    double divergence_cap = 1e12;        // iterate past this => non_absorbing
    int threads = 0;                     // OpenMP threads; 0 = runtime default.
                                         // Results are identical for any value.
};

/// Solved expected-transition table for one chain/geometry pair.
struct LatencyTable {
    std::int64_t cycle = 0;
    int m = 1;
    usec unit = 1;
    ChainSpec chain;

    std::vector<double> mu;   // y-major: mu[y*cycle + x]
    double residual = 0.0;    // final sup-norm fixed-point residual
    std::int64_t iterations = 0;
    double mu_sum = 0.0;      // compensated sum of mu over all states

    double at(std::int64_t x, int y) const { return mu[static_cast<std::size_t>(y) * cycle + x]; }
};

/// Solves mu for a DRA chain (use the Rda overload for pure RDA; PDA has no
/// analytical path here). Throws non_convergent when max_iterations is hit
/// and non_absorbing when some state provably never reaches absorption.
LatencyTable solve_mu(const Dra& mode, const Geometry& g, const SolverConfig& cfg = {});
LatencyTable solve_mu(const Rda& mode, const Geometry& g, const SolverConfig& cfg = {});

/// Expected single-advertiser discovery latency in microseconds:
/// mean interval times the mean of mu over all cycle*m states.
double expected_latency_single(const LatencyTable& table);

// --- Solver kernels -----------------------------------------------------------
//
// Eliminating the deterministic y != 0 steps leaves one unknown per offset:
// nu[x] = mu[(x,0)]. Each reduced row couples a contiguous circular window of
// `window` offsets, so a Jacobi sweep is O(cycle) with windowed sums. Two
// interchangeable sweep kernels are kept: a serial sliding-window reference,
// and the production kernel using fixed-size block prefix scans so that its
// arithmetic (and therefore its output, bit for bit) does not depend on the
// number of OpenMP threads. The bench tool compares the two.
namespace kernels {

struct ReducedSystem {
    std::int64_t cycle = 0;
    std::int64_t window = 0;              // r+1 successors per reduced row
    std::int64_t shift = 0;               // successor window start offset
    std::vector<std::uint8_t> absorbing;  // absorbing[x], size cycle
    std::vector<std::uint8_t> mask;       // mask[w]: w holds a live unknown
    std::vector<double> b;                // constant term per transient row
};

ReducedSystem build_reduced_system(const ChainSpec& chain, const Geometry& g);

/// Throws non_absorbing when some transient offset cannot reach absorption.
void check_absorption_reachable(const ReducedSystem& sys);

struct SweepWorkspace {
    std::vector<double> q;       // masked iterate (reference kernel)
    std::vector<double> prefix;  // inclusive prefix sums (production kernel)
};

struct SweepResult {
    double sup_diff = 0.0;  // sup over transient |nu_out - nu_in|
    double sup_nu = 0.0;    // sup over transient |nu_out|
};

SweepResult jacobi_sweep_reference(const ReducedSystem& sys, const std::vector<double>& nu_in,
                                   std::vector<double>& nu_out, SweepWorkspace& ws);
SweepResult jacobi_sweep(const ReducedSystem& sys, const std::vector<double>& nu_in,
                         std::vector<double>& nu_out, SweepWorkspace& ws, int threads);

}  // namespace kernels

}  // namespace blelat
