#pragma once

#include <cstdint>
#include <vector>

#include "blelat/markov.hpp"
#include "blelat/timing.hpp"

namespace blelat {

// Multi-advertiser analysis. Surrounding advertisers are summarized by their
// AIPs: group 1 has AIPs different from the target's, group 2 the same AIP.
// A collision is a surrounding PDU overlapping the target PDU on the same
// channel while the target sits in an absorbing state; per absorbing state
// that happens with probability 2*tau/T for an advertiser of AIP T.

struct Population {
    usec target_aip = 0;
    std::vector<usec> group1_aips;  // each strictly != target_aip
    std::int64_t n2 = 0;            // advertisers sharing the target's AIP
    usec tau = 0;

    std::int64_t n1() const { return static_cast<std::int64_t>(group1_aips.size()); }

    /// Throws invalid_population unless every AIP (target included) exceeds
    /// 2*tau, every group-1 AIP differs from the target's, and n2 >= 0.
    void validate() const;
};

struct CollisionReport {
    double p_no_col = 1.0;  // probability an absorbing state is collision-free
    double p1 = 0.0;        // P(collided state is due to a group-1 advertiser)
    double gamma = 1.0;     // mean transitions from a collided state onward
    double r_us = 0.0;      // expected re-entry duration R
    double h_us = 0.0;      // expected duration from collided state to discovery
    double h1_us = 0.0;     // same, conditioned on a group-1 collision
    double h2_us = 0.0;     // same, conditioned on a group-2 collision
    double x_single_us = 0.0;
    double latency_us = 0.0;  // expected discovery latency with interference
};

/// Probability that no surrounding advertiser collides at an absorbing state:
/// prod_i (1 - 2*tau/T_a_i) * (1 - 2*tau/T_a)^n2.
double p_no_collision(const Population& pop);

/// Probability a collided absorbing state was caused by a group-1 advertiser.
/// Requires n1 + n2 >= 1.
double p_group1(const Population& pop);

/// Mean transitions from a collided absorbing state to the next absorbing
/// state, averaged uniformly over all 3*(omega+1)*m absorbing states. The
/// collided state is pushed forward by the ordinary transition rule as if it
/// were transient.
double collision_gamma(const LatencyTable& table, const Geometry& g);

/// Expected duration spent re-entering collided absorbing states while both
/// sides of a same-AIP collision are still in fixed-interval steps:
/// R = gamma*T_a/m^2 * sum_{u,v} floor(min(m-u, m-v)/gamma).
double re_entry_duration(double aip_us, int m, double gamma);
double re_entry_duration(const Dra& mode, double gamma);

struct ExtraDelay {
    double h_us;
    double h1_us;
    double h2_us;
};

/// Expected duration from a collided absorbing state to discovery, plus the
/// two conditional components (h = p1*h1 + (1-p1)*h2 holds exactly).
ExtraDelay extra_delay(const Population& pop, double gamma, double r_us, double p_no_col, double p1);

/// Expected discovery latency with interference: x_single + (1 - p_no_col)*h.
double expected_latency_multi(double x_single_us, const Population& pop, double h_us);

/// Runs the whole chain of computations for a solved table and population.
/// Requires n1 + n2 >= 1 (with an empty population the latency is just the
/// single-advertiser value and none of the collision quantities are defined).
CollisionReport analyze_population(const LatencyTable& table, const Geometry& g, const Population& pop);

}  // namespace blelat
