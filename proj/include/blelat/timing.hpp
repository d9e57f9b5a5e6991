#pragma once

#include <cstdint>
#include <optional>
#include <variant>

#include "blelat/errors.hpp"

namespace blelat {

/// Integer microseconds. All protocol timing is exact integer arithmetic;
/// there is no floating-point time anywhere in the model.
using usec = std::int64_t;

/// BLE advertising channels in scan order. Within one advertising event the
/// three PDUs go out back to back: channel 37 at the event start, channel 38
/// one tau+delta later, channel 39 two tau+delta later (airtime tau, then a
/// delta listen gap on the same channel before retuning).
enum class Channel : int { Ch37 = 0, Ch38 = 1, Ch39 = 2 };

constexpr usec channel_pdu_offset(Channel c, usec tau, usec delta) {
    return static_cast<usec>(c) * (tau + delta);
}

/// Scanner and PDU timing shared by every device in a scenario.
struct ScenarioParams {
    usec tau = 376;     // Adv_PDU airtime
    usec delta = 437;   // post-PDU listen gap on the same channel
    usec ts = 310'000;  // scan interval
    usec tw = 10'375;   // scan window at the start of each scan interval
    usec unit = 1;      // microseconds per model time unit

    /// Throws invalid_params unless:
    ///   tau >= 1, delta >= 0, 0 < tw <= ts, tw >= tau,
    ///   2*(tau+delta) + tau <= ts + tw  (channel-39 containment feasible),
    ///   and tau, delta, ts, tw, are all divisible by unit.
    void validate() const;
};

// --- Advertising modes -----------------------------------------------------
//
// PDA: every advertising interval is a fixed aip.
// RDA: every interval is t_ell plus a uniform integer delay in {0..r}.
// DRA: intervals carry a mode index cycling 0,1,...,m-1; index 0 uses the
//      RDA rule, every other index uses the fixed aip. The randomized
//      interval's mean t_ell + r/2 must equal aip exactly, so the AIP is the
//      mean interval in every mode.

struct Pda {
    usec aip;
};

struct Rda {
    usec t_ell;
    usec r;  // max pseudo-random delay, inclusive

    double mean_interval_us() const { return static_cast<double>(t_ell) + static_cast<double>(r) / 2.0; }
};

struct Dra {
    usec aip;
    usec t_ell;
    usec r;
    int m;  // intervals per cycle; m = 1 degenerates to pure RDA
};

using AdvMode = std::variant<Pda, Rda, Dra>;

/// Builds a DRA mode from the advertised mean: t_ell = aip - r/2.
/// Throws invalid_params when r is odd (the mean constraint cannot hold
/// exactly) or the resulting t_ell is not positive.
Dra dra_from_aip(usec aip, usec r, int m);

/// Mode-specific invariants plus divisibility of every duration by unit.
void validate_mode(const AdvMode& mode, usec unit);

/// Shortest interval the mode can produce (t_ell for RDA/DRA, aip for PDA).
usec mode_min_interval(const AdvMode& mode);

/// Mean advertising interval (the AIP), exact in double.
double mode_mean_interval_us(const AdvMode& mode);

// --- Offset geometry --------------------------------------------------------
//
// The scanner listens on channel 37, 38, 39, 37, ... in consecutive scan
// intervals, so its schedule repeats every cycle = 3*ts. Measure a time
// offset x in [0, cycle) from the most recent channel-37 window start to an
// advertising event start. The event's channel-c PDU lands entirely inside a
// scan window of channel c exactly when
//
//   ch37: x in [0, omega]            with omega = tw - tau,
//   ch38: x in [o1, o1 + omega]      with o1 = ts - tau - delta,
//   ch39: x in [o2, o2 + omega]      with o2 = 2*(ts - tau - delta),
//
// because the channel-c PDU starts tau+delta later per channel while the
// matching window starts ts later per channel, shifting the containment
// range by ts - tau - delta each time. Those three ranges are the absorbing
// offsets; construction rejects parameter sets where they overlap or leave
// [0, cycle).
struct Geometry {
    std::int64_t cycle;  // 3*ts, in model units
    std::int64_t omega;  // tw - tau
    std::int64_t o1;     // ts - tau - delta
    std::int64_t o2;     // 2*(ts - tau - delta)
    usec unit = 1;       // microseconds per model unit, for conversions back

    std::int64_t absorbing_offset_count() const { return 3 * (omega + 1); }
};

/// Derives the offset geometry in model units. Throws invalid_params when the
/// parameters are invalid or the three absorbing ranges overlap or exceed the
/// cycle.
Geometry derive_geometry(const ScenarioParams& p);

/// Absorbing channel for offset x, or nullopt for a transient offset.
/// x must lie in [0, cycle).
std::optional<Channel> classify_offset(std::int64_t x, const Geometry& g);

/// Deterministic offset step: (x + ta) mod cycle.
std::int64_t next_offset_pda(std::int64_t x, std::int64_t ta, const Geometry& g);

/// A contiguous block of count equally likely offsets starting at base
/// (wrapping mod cycle). Probabilities are exactly 1/count each; the count
/// representation keeps them free of rounding.
struct OffsetFan {
    std::int64_t base;
    std::int64_t count;

    std::int64_t offset_at(std::int64_t j, std::int64_t cycle) const { return (base + j) % cycle; }
};

/// Randomized offset step: the r+1 offsets (x + t_ell + j) mod cycle for
/// j = 0..r, each with probability 1/(r+1).
OffsetFan next_offsets_rda(std::int64_t x, std::int64_t t_ell, std::int64_t r, const Geometry& g);

}
