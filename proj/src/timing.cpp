#include "blelat/timing.hpp"

#include <string>

namespace blelat {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw invalid_params(msg);
}

void require_unit(usec v, usec unit, const char* name) {
    if (v % unit != 0)
        throw invalid_params(std::string(name) + " must be divisible by unit (" +
                             std::to_string(v) + " % " + std::to_string(unit) + " != 0)");
}

}  // namespace

void ScenarioParams::validate() const {
    require(unit >= 1, "unit must be >= 1");
    require(tau >= 1, "tau must be >= 1");
    require(delta >= 0, "delta must be >= 0");
    require(tw > 0, "tw must be > 0");
    require(tw <= ts, "tw must be <= ts");
    require(tw >= tau, "tw must be >= tau, otherwise no PDU fits a scan window");
    require(2 * (tau + delta) + tau <= ts + tw,
            "2*(tau+delta) + tau must be <= ts + tw for channel-39 containment");
    require_unit(tau, unit, "tau");
    require_unit(delta, unit, "delta");
    require_unit(ts, unit, "ts");
    require_unit(tw, unit, "tw");
}

Dra dra_from_aip(usec aip, usec r, int m) {
    if (r < 0) throw invalid_params("r must be >= 0");
    if (r % 2 != 0)
        throw invalid_params("r must be even so that t_ell = aip - r/2 keeps the mean exact");
    Dra d{aip, aip - r / 2, r, m};
    validate_mode(d, 1);
    return d;
}

void validate_mode(const AdvMode& mode, usec unit) {
    if (unit < 1) throw invalid_params("unit must be >= 1");
    if (const auto* p = std::get_if<Pda>(&mode)) {
        require(p->aip >= 1, "PDA aip must be >= 1");
        require_unit(p->aip, unit, "aip");
    } else if (const auto* r = std::get_if<Rda>(&mode)) {
        require(r->t_ell >= 1, "RDA t_ell must be >= 1");
        require(r->r >= 0, "RDA r must be >= 0");
        require_unit(r->t_ell, unit, "t_ell");
        require_unit(r->r, unit, "r");
    } else {
        const auto& d = std::get<Dra>(mode);
        require(d.m >= 1, "DRA m must be >= 1");
        require(d.t_ell >= 1, "DRA t_ell must be >= 1");
        require(d.r >= 0, "DRA r must be >= 0");
        require(d.aip >= 1, "DRA aip must be >= 1");
        require_unit(d.aip, unit, "aip");
        require_unit(d.t_ell, unit, "t_ell");
        require_unit(d.r, unit, "r");
        require((d.r / unit) % 2 == 0, "DRA r must be even after unit scaling");
        require(d.t_ell + d.r / 2 == d.aip, "DRA mean constraint t_ell + r/2 == aip must hold exactly");
    }
}

usec mode_min_interval(const AdvMode& mode) {
    if (const auto* p = std::get_if<Pda>(&mode)) return p->aip;
    if (const auto* r = std::get_if<Rda>(&mode)) return r->t_ell;
    return std::get<Dra>(mode).t_ell;
}

double mode_mean_interval_us(const AdvMode& mode) {
    if (const auto* p = std::get_if<Pda>(&mode)) return static_cast<double>(p->aip);
    if (const auto* r = std::get_if<Rda>(&mode)) return r->mean_interval_us();
    return static_cast<double>(std::get<Dra>(mode).aip);
}

Geometry derive_geometry(const ScenarioParams& p) {
    p.validate();
    const usec omega = p.tw - p.tau;
    const usec o1 = p.ts - p.tau - p.delta;
    const usec o2 = 2 * o1;
    const usec cycle = 3 * p.ts;
    require(omega >= 0, "omega = tw - tau must be >= 0");
    require(o1 >= 0, "ts - tau - delta must be >= 0");
    // Ranges [0, omega], [o1, o1+omega], [o2, o2+omega] pairwise disjoint
    // and inside [0, cycle).
    require(omega < o1, "ch37 and ch38 absorbing ranges overlap");
    require(o1 + omega < o2, "ch38 and ch39 absorbing ranges overlap");
    require(o2 + omega < cycle, "ch39 absorbing range exceeds the scan cycle");
    return Geometry{cycle / p.unit, omega / p.unit, o1 / p.unit, o2 / p.unit, p.unit};
}

std::optional<Channel> classify_offset(std::int64_t x, const Geometry& g) {
    if (x < 0 || x >= g.cycle) throw invalid_params("offset out of [0, cycle)");
    if (x <= g.omega) return Channel::Ch37;
    if (x >= g.o1 && x <= g.o1 + g.omega) return Channel::Ch38;
    if (x >= g.o2 && x <= g.o2 + g.omega) return Channel::Ch39;
    return std::nullopt;
}

std::int64_t next_offset_pda(std::int64_t x, std::int64_t ta, const Geometry& g) {
    return (x + ta) % g.cycle;
}

OffsetFan next_offsets_rda(std::int64_t x, std::int64_t t_ell, std::int64_t r, const Geometry& g) {
    return OffsetFan{(x + t_ell) % g.cycle, r + 1};
}

}  // namespace blelat
