#include "blelat/interference.hpp"

#include <cmath>
#include <string>

namespace blelat {

namespace {

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

void Population::validate() const {
    if (tau < 1) throw invalid_population("tau must be >= 1");
    if (n2 < 0) throw invalid_population("n2 must be >= 0");
    if (target_aip <= 2 * tau)
        throw invalid_population("target AIP must exceed 2*tau");
    for (usec a : group1_aips) {
        if (a == target_aip)
            throw invalid_population("group-1 AIP equal to the target AIP; count it in n2 instead");
        if (a <= 2 * tau)
            throw invalid_population("surrounding AIP " + std::to_string(a) + " must exceed 2*tau");
    }
}

double p_no_collision(const Population& pop) {
    pop.validate();
    const double two_tau = 2.0 * static_cast<double>(pop.tau);
    double p = 1.0;
    for (usec a : pop.group1_aips) p *= 1.0 - two_tau / static_cast<double>(a);
    // The same-AIP factor via pow keeps large n2 in log space.
    p *= std::pow(1.0 - two_tau / static_cast<double>(pop.target_aip),
                  static_cast<double>(pop.n2));
    return p;
}

double p_group1(const Population& pop) {
    pop.validate();
    if (pop.n1() + pop.n2 < 1)
        throw invalid_population("p_group1 is undefined for an empty population");
    const double two_tau = 2.0 * static_cast<double>(pop.tau);
    double g1 = 0.0;
    for (usec a : pop.group1_aips) g1 += two_tau / static_cast<double>(a);
    const double g2 = static_cast<double>(pop.n2) * two_tau / static_cast<double>(pop.target_aip);
    return g1 / (g1 + g2);
}

double collision_gamma(const LatencyTable& table, const Geometry& g) {
    const std::int64_t c = table.cycle;
    const int m = table.m;
    const ChainSpec& chain = table.chain;

    // Windowed sums over the successor row of mode index 0.
    const int fan_row = m > 1 ? 1 : 0;
    std::vector<double> prefix(static_cast<std::size_t>(c) + 1, 0.0);
    {
        const double* row = table.mu.data() + static_cast<std::size_t>(fan_row) * c;
        for (std::int64_t i = 0; i < c; ++i) prefix[i + 1] = prefix[i] + row[i];
    }
    const std::int64_t window = chain.r + 1;
    const double inv_window = 1.0 / static_cast<double>(window);

    const std::int64_t starts[3] = {0, g.o1, g.o2};
    KahanSum total;
    for (int y = 0; y < m; ++y) {
        for (const std::int64_t start : starts) {
            for (std::int64_t x = start; x <= start + g.omega; ++x) {
                double k;
                if (y != 0 && m > 1) {
                    const std::int64_t sx = (x + chain.ta) % c;
                    k = 1.0 + table.at(sx, (y + 1) % m);
                } else {
                    std::int64_t a = (x + chain.t_ell) % c;
                    const std::int64_t hi = a + window;
                    double wsum;
                    if (hi <= c)
                        wsum = prefix[hi] - prefix[a];
                    else
                        wsum = (prefix[c] - prefix[a]) + prefix[hi - c];
                    k = 1.0 + wsum * inv_window;
                }
                total.add(k);
            }
        }
    }
    const double n_absorbing = 3.0 * static_cast<double>(g.omega + 1) * static_cast<double>(m);
    return total.sum / n_absorbing;
}

double re_entry_duration(double aip_us, int m, double gamma) {
    if (gamma < 1.0) throw invalid_params("gamma must be >= 1");
    if (m < 1) throw invalid_params("m must be >= 1");
    double floors = 0.0;
    for (int u = 0; u < m; ++u)
        for (int v = 0; v < m; ++v) {
            const int steps = std::min(m - u, m - v);
            floors += std::floor(static_cast<double>(steps) / gamma);
        }
    return gamma * aip_us / (static_cast<double>(m) * m) * floors;
}

double re_entry_duration(const Dra& mode, double gamma) {
    return re_entry_duration(static_cast<double>(mode.aip), mode.m, gamma);
}

ExtraDelay extra_delay(const Population& pop, double gamma, double r_us, double p_no_col,
                       double p1) {
    if (!(p_no_col > 0.0) || p_no_col > 1.0)
        throw invalid_population("p_no_col must be in (0, 1]");
    const double ta = static_cast<double>(pop.target_aip);
    const double h = (gamma * ta + (1.0 - p1) * r_us) / p_no_col;
    const double h1 = gamma * ta + (1.0 - p_no_col) * h;
    const double h2 = r_us + gamma * ta + (1.0 - p_no_col) * h;
    return ExtraDelay{h, h1, h2};
}

double expected_latency_multi(double x_single_us, const Population& pop, double h_us) {
    return x_single_us + (1.0 - p_no_collision(pop)) * h_us;
}

CollisionReport analyze_population(const LatencyTable& table, const Geometry& g,
                                   const Population& pop) {
    pop.validate();
    if (pop.n1() + pop.n2 < 1)
        throw invalid_population("analyze_population needs at least one surrounding advertiser");

    CollisionReport rep;
    rep.p_no_col = p_no_collision(pop);
    rep.p1 = p_group1(pop);
    rep.gamma = collision_gamma(table, g);
    rep.r_us = re_entry_duration(table.chain.aip_us, table.m, rep.gamma);
    const auto h = extra_delay(pop, rep.gamma, rep.r_us, rep.p_no_col, rep.p1);
    rep.h_us = h.h_us;
    rep.h1_us = h.h1_us;
    rep.h2_us = h.h2_us;
    rep.x_single_us = expected_latency_single(table);
    rep.latency_us = rep.x_single_us + (1.0 - rep.p_no_col) * rep.h_us;
    return rep;
}

}  // namespace blelat
