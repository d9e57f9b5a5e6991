#include "blelat/markov.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace blelat {

namespace {

std::int64_t to_units(usec v, usec unit, const char* name) {
    if (v % unit != 0)
        throw invalid_params(std::string(name) + " not divisible by model unit");
    return v / unit;
}

struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double v) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

}  // namespace

ChainSpec chain_spec(const Dra& mode, usec unit) {
    validate_mode(AdvMode{mode}, unit);
    ChainSpec c;
    c.ta = to_units(mode.aip, unit, "aip");
    c.t_ell = to_units(mode.t_ell, unit, "t_ell");
    c.r = to_units(mode.r, unit, "r");
    c.m = mode.m;
    c.aip_us = static_cast<double>(mode.aip);
    return c;
}

ChainSpec chain_spec(const Rda& mode, usec unit) {
    validate_mode(AdvMode{mode}, unit);
    ChainSpec c;
    c.ta = 0;
    c.t_ell = to_units(mode.t_ell, unit, "t_ell");
    c.r = to_units(mode.r, unit, "r");
    c.m = 1;
    c.aip_us = mode.mean_interval_us();
    return c;
}

SuccessorFan successors(MarkovState s, const ChainSpec& chain, const Geometry& g) {
    const std::int64_t c = g.cycle;
    if (chain.m > 1 && s.y != 0)
        return SuccessorFan{(s.x + chain.ta) % c, 1, (s.y + 1) % chain.m};
    return SuccessorFan{(s.x + chain.t_ell) % c, chain.r + 1, chain.m > 1 ? 1 : 0};
}

SuccessorFan successors(MarkovState s, const AdvMode& mode, const Geometry& g) {
    if (const auto* p = std::get_if<Pda>(&mode)) {
        const std::int64_t aip = to_units(p->aip, g.unit, "aip");
        return SuccessorFan{(s.x + aip) % g.cycle, 1, 0};
    }
    if (const auto* r = std::get_if<Rda>(&mode))
        return successors(s, chain_spec(*r, g.unit), g);
    return successors(s, chain_spec(std::get<Dra>(mode), g.unit), g);
}

namespace kernels {

ReducedSystem build_reduced_system(const ChainSpec& chain, const Geometry& g) {
    const std::int64_t c = g.cycle;
    ReducedSystem sys;
    sys.cycle = c;
    sys.window = chain.r + 1;
    if (sys.window > c)
        throw invalid_params("r + 1 must not exceed the scan cycle");
    if (chain.m < 1) throw invalid_params("m must be >= 1");

    sys.absorbing.assign(static_cast<std::size_t>(c), 0);
    for (std::int64_t x = 0; x < c; ++x)
        sys.absorbing[x] = classify_offset(x, g).has_value() ? 1 : 0;

    // Deterministic-walk elimination: entering mode index 1 at offset z, the
    // chain takes m-1 fixed steps of ta before the next randomized interval.
    // esc[z] = 1 when the walk reaches mode 0 without absorbing; cst[z] is the
    // number of transitions contributed by the walk (first hit index, or m-1).
    const std::int64_t walk_steps = chain.m - 1;
    const std::int64_t ta_mod = chain.m > 1 ? chain.ta % c : 0;
    std::vector<std::uint8_t> esc(static_cast<std::size_t>(c), 0);
    std::vector<std::int32_t> cst(static_cast<std::size_t>(c), 0);
#pragma omp parallel for schedule(static)
    for (std::int64_t z = 0; z < c; ++z) {
        if (sys.absorbing[z]) {
            esc[z] = 0;
            cst[z] = 0;
            continue;
        }
        std::int64_t cur = z;
        std::int32_t hit = -1;
        for (std::int64_t i = 1; i <= walk_steps; ++i) {
            cur += ta_mod;
            if (cur >= c) cur -= c;
            if (sys.absorbing[cur]) {
                hit = static_cast<std::int32_t>(i);
                break;
            }
        }
        if (hit >= 0) {
            esc[z] = 0;
            cst[z] = hit;
        } else {
            esc[z] = 1;
            cst[z] = static_cast<std::int32_t>(walk_steps);
        }
    }

    const std::int64_t d = (walk_steps * (chain.ta % c)) % c;
    sys.shift = (chain.t_ell % c + d) % c;

    sys.mask.assign(static_cast<std::size_t>(c), 0);
    for (std::int64_t w = 0; w < c; ++w) {
        std::int64_t z = w - d;
        if (z < 0) z += c;
        sys.mask[w] = esc[z];
    }

    // Constant term: 1 plus the mean walk contribution over the fan.
    std::vector<std::int64_t> cst_prefix(static_cast<std::size_t>(c) + 1, 0);
    for (std::int64_t i = 0; i < c; ++i) cst_prefix[i + 1] = cst_prefix[i] + cst[i];
    const double inv_window = 1.0 / static_cast<double>(sys.window);
    const std::int64_t base = chain.t_ell % c;
    sys.b.assign(static_cast<std::size_t>(c), 0.0);
#pragma omp parallel for schedule(static)
    for (std::int64_t x = 0; x < c; ++x) {
        if (sys.absorbing[x]) continue;
        std::int64_t a = x + base;
        if (a >= c) a -= c;
        const std::int64_t hi = a + sys.window;
        std::int64_t wsum;
        if (hi <= c)
            wsum = cst_prefix[hi] - cst_prefix[a];
        else
            wsum = (cst_prefix[c] - cst_prefix[a]) + cst_prefix[hi - c];
        sys.b[x] = 1.0 + static_cast<double>(wsum) * inv_window;
    }
    return sys;
}

void check_absorption_reachable(const ReducedSystem& sys) {
    const std::int64_t c = sys.cycle;

    // Seed set: rows where at least one fan branch absorbs during (or at the
    // start of) its deterministic walk, i.e. some esc in the row's window is
    // zero. esc[(w - d) mod c] is mask[w]; the row's esc window starts at
    // shift - d + t_ell... expressed over mask it starts at (x + shift).
    std::vector<std::int64_t> mask_prefix(static_cast<std::size_t>(c) + 1, 0);
    for (std::int64_t i = 0; i < c; ++i) mask_prefix[i + 1] = mask_prefix[i] + sys.mask[i];

    // next[i]: smallest not-yet-visited index >= i (path-compressed).
    std::vector<std::int64_t> next(static_cast<std::size_t>(c) + 1);
    for (std::int64_t i = 0; i <= c; ++i) next[i] = i;
    auto find = [&](std::int64_t i) {
        while (next[i] != i) {
            next[i] = next[next[i]];
            i = next[i];
        }
        return i;
    };

    std::vector<std::int64_t> queue;
    queue.reserve(static_cast<std::size_t>(c));
    for (std::int64_t x = 0; x < c; ++x) {
        if (sys.absorbing[x]) {
            next[x] = x + 1;
            continue;
        }
        std::int64_t a = x + sys.shift;
        if (a >= c) a -= c;
        const std::int64_t hi = a + sys.window;
        std::int64_t live;
        if (hi <= c)
            live = mask_prefix[hi] - mask_prefix[a];
        else
            live = (mask_prefix[c] - mask_prefix[a]) + mask_prefix[hi - c];
        if (live < sys.window) {  // some branch absorbs in one reduced step
            next[x] = x + 1;
            queue.push_back(x);
        }
    }

    // Backward interval BFS: predecessors of w are the transient x with
    // (x + shift) .. (x + shift + window - 1) covering w, i.e. a contiguous
    // window of size `window` ending at w - shift. Edges into w exist only
    // when mask[w] is set.
    std::size_t head = 0;
    while (head < queue.size()) {
        const std::int64_t w = queue[head++];
        if (!sys.mask[w]) continue;
        std::int64_t lo = (w - sys.shift - (sys.window - 1)) % c;
        if (lo < 0) lo += c;
        for (std::int64_t span = sys.window; span > 0;) {
            const std::int64_t len = std::min(span, c - lo);
            std::int64_t i = find(lo);
            const std::int64_t end = lo + len;
            while (i < end) {
                next[i] = i + 1;
                queue.push_back(i);
                i = find(i + 1);
            }
            span -= len;
            lo = 0;
        }
    }

    const std::int64_t leftover = find(0);
    if (leftover < c)
        throw non_absorbing("offset " + std::to_string(leftover) +
                            " can never reach an absorbing offset; expected transitions are infinite");
}

namespace {

// Fixed block size keeps prefix-sum arithmetic independent of thread count.
constexpr std::int64_t kScanBlock = 8192;
constexpr std::int64_t kSlideRefresh = 4096;

inline double window_sum(const std::vector<double>& prefix, std::int64_t cycle, std::int64_t a,
                         std::int64_t window) {
    const std::int64_t hi = a + window;
    if (hi <= cycle) return prefix[hi] - prefix[a];
    return (prefix[cycle] - prefix[a]) + prefix[hi - cycle];
}

}  // namespace

SweepResult jacobi_sweep_reference(const ReducedSystem& sys, const std::vector<double>& nu_in,
                                   std::vector<double>& nu_out, SweepWorkspace& ws) {
    const std::int64_t c = sys.cycle;
    const double inv_window = 1.0 / static_cast<double>(sys.window);
    ws.q.resize(static_cast<std::size_t>(c));
    for (std::int64_t w = 0; w < c; ++w) ws.q[w] = sys.mask[w] ? nu_in[w] : 0.0;

    auto wrapped = [&](std::int64_t i) { return i >= c ? i - c : i; };
    auto fresh_sum = [&](std::int64_t x) {
        double s = 0.0;
        std::int64_t a = wrapped(x + sys.shift % c);
        for (std::int64_t j = 0; j < sys.window; ++j) {
            s += ws.q[a];
            ++a;
            if (a == c) a = 0;
        }
        return s;
    };

    SweepResult res;
    double sum = 0.0;
    for (std::int64_t x = 0; x < c; ++x) {
        if (x % kSlideRefresh == 0) sum = fresh_sum(x);  // bound sliding drift
        if (!sys.absorbing[x]) {
            const double v = sys.b[x] + sum * inv_window;
            nu_out[x] = v;
            res.sup_diff = std::max(res.sup_diff, std::abs(v - nu_in[x]));
            res.sup_nu = std::max(res.sup_nu, std::abs(v));
        } else {
            nu_out[x] = 0.0;
        }
        sum += ws.q[wrapped(wrapped(x + sys.shift % c) + sys.window)] - ws.q[wrapped(x + sys.shift % c)];
    }
    return res;
}

SweepResult jacobi_sweep(const ReducedSystem& sys, const std::vector<double>& nu_in,
                         std::vector<double>& nu_out, SweepWorkspace& ws, int threads) {
    const std::int64_t c = sys.cycle;
    const double inv_window = 1.0 / static_cast<double>(sys.window);
    const std::int64_t nblocks = (c + kScanBlock - 1) / kScanBlock;
    ws.prefix.resize(static_cast<std::size_t>(c) + 1);
    std::vector<double> block_sum(static_cast<std::size_t>(nblocks));

#ifdef _OPENMP
    const int nth = threads > 0 ? threads : omp_get_max_threads();
#else
    const int nth = 1;
    (void)threads;
#endif
    (void)nth;

    SweepResult res;
#pragma omp parallel num_threads(nth)
    {
#pragma omp for schedule(static)
        for (std::int64_t bidx = 0; bidx < nblocks; ++bidx) {
            const std::int64_t lo = bidx * kScanBlock;
            const std::int64_t hi = std::min(lo + kScanBlock, c);
            double s = 0.0;
            for (std::int64_t i = lo; i < hi; ++i) s += sys.mask[i] ? nu_in[i] : 0.0;
            block_sum[bidx] = s;
        }

#pragma omp single
        {
            double run = 0.0;
            for (std::int64_t bidx = 0; bidx < nblocks; ++bidx) {
                const double s = block_sum[bidx];
                block_sum[bidx] = run;  // exclusive
                run += s;
            }
            ws.prefix[0] = 0.0;
        }

#pragma omp for schedule(static)
        for (std::int64_t bidx = 0; bidx < nblocks; ++bidx) {
            const std::int64_t lo = bidx * kScanBlock;
            const std::int64_t hi = std::min(lo + kScanBlock, c);
            double run = block_sum[bidx];
            for (std::int64_t i = lo; i < hi; ++i) {
                run += sys.mask[i] ? nu_in[i] : 0.0;
                ws.prefix[i + 1] = run;
            }
        }

        double local_diff = 0.0;
        double local_sup = 0.0;
#pragma omp for schedule(static) nowait
        for (std::int64_t x = 0; x < c; ++x) {
            if (sys.absorbing[x]) {
                nu_out[x] = 0.0;
                continue;
            }
            std::int64_t a = x + sys.shift;
            if (a >= c) a -= c;
            const double v = sys.b[x] + window_sum(ws.prefix, c, a, sys.window) * inv_window;
            nu_out[x] = v;
            local_diff = std::max(local_diff, std::abs(v - nu_in[x]));
            local_sup = std::max(local_sup, std::abs(v));
        }
#pragma omp critical
        {
            res.sup_diff = std::max(res.sup_diff, local_diff);
            res.sup_nu = std::max(res.sup_nu, local_sup);
        }
    }
    return res;
}

}  // namespace kernels

namespace {

// Re-expands the reduced solution to the full cycle x m table and fills the
// solver metadata. nu holds mu[(x, 0)].
LatencyTable expand_table(const ChainSpec& chain, const Geometry& g,
                          const kernels::ReducedSystem& sys, std::vector<double>&& nu,
                          double residual, std::int64_t iterations) {
    const std::int64_t c = g.cycle;
    LatencyTable t;
    t.cycle = c;
    t.m = chain.m;
    t.unit = g.unit;
    t.chain = chain;
    t.residual = residual;
    t.iterations = iterations;
    t.mu.assign(static_cast<std::size_t>(c) * chain.m, 0.0);

    for (std::int64_t x = 0; x < c; ++x) t.mu[x] = nu[x];
    const std::int64_t ta_mod = chain.m > 1 ? chain.ta % c : 0;
    for (int y = 1; y < chain.m; ++y) {
        const std::int64_t steps = chain.m - y;  // fixed steps until mode 0
        double* row = t.mu.data() + static_cast<std::size_t>(y) * c;
#pragma omp parallel for schedule(static)
        for (std::int64_t x = 0; x < c; ++x) {
            if (sys.absorbing[x]) continue;
            std::int64_t cur = x;
            double v = static_cast<double>(steps);
            for (std::int64_t i = 1; i <= steps; ++i) {
                cur += ta_mod;
                if (cur >= c) cur -= c;
                if (sys.absorbing[cur]) {
                    v = static_cast<double>(i);
                    break;
                }
            }
            if (v == static_cast<double>(steps) && !sys.absorbing[cur]) v += nu[cur];
            row[x] = v;
        }
    }

    KahanSum total;
    for (int y = 0; y < chain.m; ++y) {
        const double* row = t.mu.data() + static_cast<std::size_t>(y) * c;
        for (std::int64_t x = 0; x < c; ++x) total.add(row[x]);
    }
    t.mu_sum = total.sum;
    return t;
}

LatencyTable solve_iterative(const ChainSpec& chain, const Geometry& g, const SolverConfig& cfg) {
    auto sys = kernels::build_reduced_system(chain, g);
    kernels::check_absorption_reachable(sys);

    const std::int64_t c = g.cycle;
    std::vector<double> nu(static_cast<std::size_t>(c), 0.0);
    std::vector<double> nu_next(static_cast<std::size_t>(c), 0.0);
    kernels::SweepWorkspace ws;

    double residual = 0.0;
    std::int64_t iters = 0;
    bool converged = false;
    while (iters < cfg.max_iterations) {
        const auto res = kernels::jacobi_sweep(sys, nu, nu_next, ws, cfg.threads);
        nu.swap(nu_next);
        ++iters;
        residual = res.sup_diff;
        if (res.sup_nu > cfg.divergence_cap)
            throw non_absorbing("iterate exceeded divergence cap; absorption appears unreachable");
        if (res.sup_diff <= cfg.tolerance * std::max(1.0, res.sup_nu)) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw non_convergent("solver did not reach tolerance " + std::to_string(cfg.tolerance) +
                             " within " + std::to_string(cfg.max_iterations) + " sweeps");
    return expand_table(chain, g, sys, std::move(nu), residual, iters);
}

// Explicit dense solve of the full (x, y) system with Gaussian elimination.
// Meant for cross-checking on tiny instances.
LatencyTable solve_dense(const ChainSpec& chain, const Geometry& g, const SolverConfig&) {
    const std::int64_t c = g.cycle;
    const std::int64_t n_states = c * chain.m;
    if (n_states > 4096)
        throw invalid_params("DirectDense is limited to cycle*m <= 4096 states");

    std::vector<std::int64_t> index(static_cast<std::size_t>(n_states), -1);
    std::vector<std::int64_t> states;
    for (int y = 0; y < chain.m; ++y)
        for (std::int64_t x = 0; x < c; ++x)
            if (!classify_offset(x, g).has_value()) {
                index[static_cast<std::size_t>(y) * c + x] = static_cast<std::int64_t>(states.size());
                states.push_back(static_cast<std::size_t>(y) * c + x);
            }

    const std::int64_t n = static_cast<std::int64_t>(states.size());
    std::vector<double> a(static_cast<std::size_t>(n) * (n + 1), 0.0);
    auto at = [&](std::int64_t i, std::int64_t j) -> double& { return a[i * (n + 1) + j]; };
    for (std::int64_t i = 0; i < n; ++i) {
        const std::int64_t x = states[i] % c;
        const int y = static_cast<int>(states[i] / c);
        at(i, i) += 1.0;
        at(i, n) = 1.0;
        const auto fan = successors(MarkovState{x, y}, chain, g);
        const double p = 1.0 / static_cast<double>(fan.count);
        for (std::int64_t j = 0; j < fan.count; ++j) {
            const std::int64_t sx = (fan.base_x + j) % c;
            const std::int64_t si = index[static_cast<std::size_t>(fan.y) * c + sx];
            if (si >= 0) at(i, si) -= p;
        }
    }

    for (std::int64_t col = 0; col < n; ++col) {
        std::int64_t piv = col;
        for (std::int64_t i = col + 1; i < n; ++i)
            if (std::abs(at(i, col)) > std::abs(at(piv, col))) piv = i;
        if (piv != col)
            for (std::int64_t j = col; j <= n; ++j) std::swap(at(col, j), at(piv, j));
        if (at(col, col) == 0.0)
            throw non_absorbing("dense system is singular; absorption unreachable from some state");
        for (std::int64_t i = col + 1; i < n; ++i) {
            const double f = at(i, col) / at(col, col);
            if (f == 0.0) continue;
            for (std::int64_t j = col; j <= n; ++j) at(i, j) -= f * at(col, j);
        }
    }
    std::vector<double> sol(static_cast<std::size_t>(n), 0.0);
    for (std::int64_t i = n - 1; i >= 0; --i) {
        double v = at(i, n);
        for (std::int64_t j = i + 1; j < n; ++j) v -= at(i, j) * sol[j];
        sol[i] = v / at(i, i);
    }

    LatencyTable t;
    t.cycle = c;
    t.m = chain.m;
    t.unit = g.unit;
    t.chain = chain;
    t.iterations = 0;
    t.mu.assign(static_cast<std::size_t>(n_states), 0.0);
    for (std::int64_t i = 0; i < n; ++i) t.mu[states[i]] = sol[i];

    // Residual by direct substitution.
    double rmax = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const std::int64_t x = states[i] % c;
        const int y = static_cast<int>(states[i] / c);
        const auto fan = successors(MarkovState{x, y}, chain, g);
        const double p = 1.0 / static_cast<double>(fan.count);
        double rhs = 1.0;
        for (std::int64_t j = 0; j < fan.count; ++j)
            rhs += p * t.mu[static_cast<std::size_t>(fan.y) * c + (fan.base_x + j) % c];
        rmax = std::max(rmax, std::abs(t.mu[states[i]] - rhs));
    }
    t.residual = rmax;

    KahanSum total;
    for (double v : t.mu) total.add(v);
    t.mu_sum = total.sum;
    return t;
}

LatencyTable solve_chain(const ChainSpec& chain, const Geometry& g, const SolverConfig& cfg) {
    if (cfg.tolerance <= 0) throw invalid_params("solver tolerance must be > 0");
    if (cfg.method == SolverConfig::Method::DirectDense) return solve_dense(chain, g, cfg);
    return solve_iterative(chain, g, cfg);
}

}  // namespace

LatencyTable solve_mu(const Dra& mode, const Geometry& g, const SolverConfig& cfg) {
    return solve_chain(chain_spec(mode, g.unit), g, cfg);
}

LatencyTable solve_mu(const Rda& mode, const Geometry& g, const SolverConfig& cfg) {
    return solve_chain(chain_spec(mode, g.unit), g, cfg);
}

double expected_latency_single(const LatencyTable& table) {
    const double states = static_cast<double>(table.cycle) * static_cast<double>(table.m);
    return table.chain.aip_us * table.mu_sum / states;
}

}  // namespace blelat
