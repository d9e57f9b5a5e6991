#include "blelat/sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "blelat/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace blelat {

namespace {

std::int64_t mod_floor(std::int64_t a, std::int64_t m) {
    std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

// One advertiser's schedule, stepped interval by interval. kind folds PDA and
// RDA into the DRA rule: PDA never randomizes, RDA always does (m = 1).
struct AdvSchedule {
    usec aip = 0;
    usec t_ell = 0;
    usec r = 0;
    int m = 1;
    bool pda = false;

    Xoshiro256ss rng;
    usec event = 0;    // current event start
    int y = 0;         // mode index of the current interval
    usec cur_len = 0;  // length of the current interval

    AdvSchedule(const AdvMode& mode, Xoshiro256ss stream) : rng(stream) {
        if (const auto* p = std::get_if<Pda>(&mode)) {
            pda = true;
            aip = p->aip;
        } else if (const auto* rd = std::get_if<Rda>(&mode)) {
            t_ell = rd->t_ell;
            r = rd->r;
        } else {
            const auto& d = std::get<Dra>(mode);
            aip = d.aip;
            t_ell = d.t_ell;
            r = d.r;
            m = d.m;
        }
        y = static_cast<int>(rng.uniform_int(0, m - 1));
        cur_len = draw_len();
    }

    usec draw_len() {
        if (pda) return aip;
        if (y == 0) return t_ell + rng.uniform_int(0, r);
        return aip;
    }

    void advance() {
        event += cur_len;
        y = (y + 1) % m;
        cur_len = draw_len();
    }
};

}  // namespace

bool detect_overlap(usec a_start, usec a_end, usec b_start, usec b_end) {
    return a_start < b_end && b_start < a_end;
}

bool persistent_collision_check(usec target_ch37_start, usec collider_ch37_start, usec aip,
                                usec tau) {
    const std::int64_t d = mod_floor(collider_ch37_start - target_ch37_start, aip);
    return d < tau || d > aip - tau;
}

void SimScenario::validate() const {
    params.validate();
    validate_mode(target, 1);
    for (const auto& mode : surrounding) validate_mode(mode, 1);
    if (horizon < 3 * params.ts)
        throw invalid_params("horizon must cover at least one scan cycle");
    if (!surrounding.empty()) {
        // The lazy schedule advance assumes overlap windows of consecutive
        // target events never intersect, which needs intervals > 2*tau.
        if (mode_min_interval(target) < 2 * params.tau + 1)
            throw invalid_params("target min interval must exceed 2*tau when surrounding advertisers exist");
        for (const auto& mode : surrounding)
            if (mode_min_interval(mode) < 2 * params.tau + 1)
                throw invalid_params("surrounding min interval must exceed 2*tau");
    }
    if (fixed_phase && (*fixed_phase < 0 || *fixed_phase >= 3 * params.ts))
        throw invalid_params("fixed_phase must lie in [0, 3*ts)");
    if (forced_surrounding_age) {
        if (forced_surrounding_age->size() != surrounding.size())
            throw invalid_params("forced_surrounding_age must match surrounding size");
        for (std::size_t i = 0; i < surrounding.size(); ++i) {
            const usec o = (*forced_surrounding_age)[i];
            if (o < 0 || o >= mode_min_interval(surrounding[i]))
                throw invalid_params("forced age must lie in [0, min interval)");
        }
    }
}

RunOutcome simulate_run(const SimScenario& sc, std::uint64_t run_index, RunTrace* trace) {
    sc.validate();
    const usec tau = sc.params.tau;
    const usec delta = sc.params.delta;
    const usec ts = sc.params.ts;
    const usec omega = sc.params.tw - tau;

    Xoshiro256ss scanner_rng(sc.seed, run_index, 0);
    const usec phi = sc.fixed_phase ? *sc.fixed_phase : scanner_rng.uniform_int(0, 3 * ts - 1);

    AdvSchedule target(sc.target, Xoshiro256ss(sc.seed, run_index, 1));
    std::vector<AdvSchedule> advs;
    advs.reserve(sc.surrounding.size());
    for (std::size_t i = 0; i < sc.surrounding.size(); ++i) {
        AdvSchedule a(sc.surrounding[i], Xoshiro256ss(sc.seed, run_index, 2 + i));
        const usec age = sc.forced_surrounding_age ? (*sc.forced_surrounding_age)[i]
                                                   : a.rng.uniform_int(0, a.cur_len - 1);
        a.event = -age;
        advs.push_back(a);
    }

    if (trace) {
        trace->phi = phi;
        trace->target_initial_mode = target.y;
        trace->target_events.clear();
        trace->blocked.clear();
    }

    // A PDA target locked within tau of an equal-AIP PDA neighbour collides
    // at every absorbing event forever; classify instead of simulating out
    // the horizon.
    if (!sc.disable_persistent_fast_path) {
        if (const auto* tp = std::get_if<Pda>(&sc.target)) {
            for (std::size_t i = 0; i < advs.size(); ++i) {
                const auto* sp = std::get_if<Pda>(&sc.surrounding[i]);
                if (sp && sp->aip == tp->aip &&
                    persistent_collision_check(0, advs[i].event, tp->aip, tau))
                    return RunOutcome{RunOutcome::Kind::CensoredPersistent, 0, Channel::Ch37};
            }
        }
    }

    while (target.event <= sc.horizon) {
        const usec t = target.event;
        if (trace) trace->target_events.push_back({t, target.y, target.cur_len});

        for (int c = 0; c < 3; ++c) {
            const usec pdu = t + c * (tau + delta);
            const usec a = pdu + phi;
            if ((a / ts) % 3 != c || a % ts > omega) continue;

            // In-window PDU; it survives unless some surrounding PDU on the
            // same channel intersects its airtime.
            bool destroyed = false;
            for (auto& adv : advs) {
                while (adv.event <= t + tau) {
                    if (adv.event > t - tau) {
                        const usec other = adv.event + c * (tau + delta);
                        if (detect_overlap(pdu, pdu + tau, other, other + tau)) {
                            destroyed = true;
                            break;
                        }
                    }
                    adv.advance();
                }
                if (destroyed) break;
            }
            if (!destroyed)
                return RunOutcome{RunOutcome::Kind::Discovered, t, static_cast<Channel>(c)};
            if (trace) trace->blocked.push_back({t, static_cast<Channel>(c)});
        }
        target.advance();
    }
    return RunOutcome{RunOutcome::Kind::CensoredHorizon, 0, Channel::Ch37};
}

BatchStats simulate_batch(const SimScenario& sc, std::int64_t runs, int workers) {
    if (runs < 1) throw invalid_params("runs must be >= 1");
    sc.validate();

    struct Rec {
        usec latency;
        std::uint8_t kind;
    };
    std::vector<Rec> recs(static_cast<std::size_t>(runs));

#ifdef _OPENMP
    const int nth = workers > 0 ? workers : omp_get_max_threads();
#else
    const int nth = 1;
    (void)nth;
#endif
#pragma omp parallel for schedule(dynamic, 64) num_threads(nth)
    for (std::int64_t i = 0; i < runs; ++i) {
        const RunOutcome out = simulate_run(sc, static_cast<std::uint64_t>(i));
        recs[i] = Rec{out.latency, static_cast<std::uint8_t>(out.kind)};
    }

    // Serial reduction in run-index order keeps batch statistics independent
    // of the worker count.
    BatchStats st;
    st.runs = runs;
    double mean = 0.0, m2 = 0.0;
    std::int64_t n = 0;
    for (const auto& rec : recs) {
        switch (static_cast<RunOutcome::Kind>(rec.kind)) {
            case RunOutcome::Kind::Discovered: {
                ++n;
                const double v = static_cast<double>(rec.latency);
                const double d = v - mean;
                mean += d / static_cast<double>(n);
                m2 += d * (v - mean);
                break;
            }
            case RunOutcome::Kind::CensoredHorizon:
                ++st.censored_horizon;
                break;
            case RunOutcome::Kind::CensoredPersistent:
                ++st.censored_persistent;
                break;
        }
    }
    st.discovered = n;
    st.mean_latency_us = n > 0 ? mean : 0.0;
    if (n > 1) {
        const double var = m2 / static_cast<double>(n - 1);
        st.ci95_halfwidth_us = 1.96 * std::sqrt(var / static_cast<double>(n));
    }
    return st;
}

}  // namespace blelat
