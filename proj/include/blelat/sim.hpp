#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "blelat/timing.hpp"

namespace blelat {

// Monte Carlo simulator: one scanner, one target advertiser, any number of
// surrounding advertisers. Schedules are stepped in closed form (no event
// queue); all times are integer microseconds on an absolute axis where the
// target's first complete advertising interval starts at t = 0.
//
// The scanner's phase is randomized instead of the advertiser's: channel-37
// windows start at -phi + 3k*ts with phi uniform on [0, 3*ts), so the first
// target event has a uniform time offset. Every advertiser of every run owns
// an independent RNG stream keyed by (seed, run_index, stream): stream 0 is
// the scanner, stream 1 the target, stream 2+i surrounding advertiser i.

struct SimScenario {
    ScenarioParams params;
    AdvMode target{Pda{170'000}};
    std::vector<AdvMode> surrounding;
    usec horizon = 1'000'000'000;
    std::uint64_t seed = 0;

    // Test hooks.
    std::optional<usec> fixed_phase;  // pin the scanner phase phi
    std::optional<std::vector<usec>> forced_surrounding_age;  // pin each o_i:
        // surrounding advertiser i's first event starts at -o_i
    bool disable_persistent_fast_path = false;

    void validate() const;
};

struct RunOutcome {
    enum class Kind { Discovered, CensoredHorizon, CensoredPersistent };
    Kind kind = Kind::CensoredHorizon;
    usec latency = 0;          // valid when Discovered; in [0, horizon]
    Channel channel = Channel::Ch37;

    bool discovered() const { return kind == Kind::Discovered; }
};

/// Per-run event log for debugging and trajectory checks.
struct RunTrace {
    usec phi = 0;
    int target_initial_mode = 0;
    struct Event {
        usec t;         // advertising event start
        int mode_index; // mode index of the interval starting here
        usec interval;  // its drawn length
    };
    std::vector<Event> target_events;
    struct Blocked {
        usec t;
        Channel channel;
    };
    std::vector<Blocked> blocked;  // in-window PDUs destroyed by collisions
};

/// Simulates one run. Deterministic in (scenario, run_index).
RunOutcome simulate_run(const SimScenario& sc, std::uint64_t run_index, RunTrace* trace = nullptr);

struct BatchStats {
    std::int64_t runs = 0;
    std::int64_t discovered = 0;
    std::int64_t censored_persistent = 0;
    std::int64_t censored_horizon = 0;
    double mean_latency_us = 0.0;     // over discovered runs only
    double ci95_halfwidth_us = 0.0;   // 1.96 * stderr of the mean
};

/// Runs run indices 0..runs-1 and aggregates. Results are bit-identical for
/// any worker count: per-run streams never depend on scheduling, and the
/// reduction runs serially in run-index order.
BatchStats simulate_batch(const SimScenario& sc, std::int64_t runs, int workers = 0);

/// Half-open airtime intervals [a_start, a_end) and [b_start, b_end).
bool detect_overlap(usec a_start, usec a_end, usec b_start, usec b_end);

/// Persistent-collision test for two equal-AIP PDA advertisers: true iff
/// their channel-37 PDU start difference mod aip falls in (-tau, tau).
bool persistent_collision_check(usec target_ch37_start, usec collider_ch37_start, usec aip,
                                usec tau);

}  // namespace blelat
