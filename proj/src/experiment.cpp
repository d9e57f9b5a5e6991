#include "blelat/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "blelat/rng.hpp"
#include "blelat/version.hpp"

namespace blelat {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            const std::string t = trim(cur);
            if (!t.empty()) out.push_back(t);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    const std::string t = trim(cur);
    if (!t.empty()) out.push_back(t);
    return out;
}

}  // namespace

ModeSpec parse_mode_spec(const std::string& text) {
    const std::string t = trim(text);
    if (t == "pda") return ModeSpec{ModeSpec::Kind::Pda, 0};
    if (t == "rda") return ModeSpec{ModeSpec::Kind::Rda, 0};
    if (t == "dra") return ModeSpec{ModeSpec::Kind::Dra, 0};
    if (t.rfind("dra:", 0) == 0) {
        const std::string ms = t.substr(4);
        try {
            const int m = std::stoi(ms);
            if (m < 1 || std::to_string(m) != ms) throw std::invalid_argument(ms);
            return ModeSpec{ModeSpec::Kind::Dra, m};
        } catch (const std::exception&) {
            throw config_error("invalid DRA m in mode spec '" + t + "'");
        }
    }
    throw config_error("unknown mode '" + t + "' (expected pda, rda, dra or dra:<m>)");
}

std::string mode_spec_text(const ModeSpec& spec) {
    switch (spec.kind) {
        case ModeSpec::Kind::Pda: return "pda";
        case ModeSpec::Kind::Rda: return "rda";
        case ModeSpec::Kind::Dra: return spec.m > 0 ? "dra:" + std::to_string(spec.m) : "dra";
    }
    return "dra";
}

void RawConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw config_error(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty())
            throw config_error(path + ":" + std::to_string(lineno) + ": empty key");
        set(key, value, path + ":" + std::to_string(lineno));
    }
}

void RawConfig::set(const std::string& key, const std::string& value, const std::string& origin) {
    entries.emplace_back(key, value);
    origins.push_back(origin);
}

namespace {

class TypedReader {
public:
    explicit TypedReader(const RawConfig& raw) {
        for (std::size_t i = 0; i < raw.entries.size(); ++i)
            values_[raw.entries[i].first] = {raw.entries[i].second, raw.origins[i]};
    }

    bool has(const std::string& key) {
        const auto it = values_.find(key);
        if (it == values_.end()) return false;
        consumed_.insert(key);
        return true;
    }

    std::string str(const std::string& key) {
        consumed_.insert(key);
        return values_.at(key).first;
    }

    std::int64_t i64(const std::string& key) {
        const std::string v = str(key);
        try {
            std::size_t pos = 0;
            const std::int64_t out = std::stoll(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return out;
        } catch (const std::exception&) {
            fail(key, "expected an integer, got '" + v + "'");
        }
    }

    std::uint64_t u64(const std::string& key) {
        const std::string v = str(key);
        try {
            std::size_t pos = 0;
            const std::uint64_t out = std::stoull(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return out;
        } catch (const std::exception&) {
            fail(key, "expected an unsigned integer, got '" + v + "'");
        }
    }

    double f64(const std::string& key) {
        const std::string v = str(key);
        try {
            std::size_t pos = 0;
            const double out = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return out;
        } catch (const std::exception&) {
            fail(key, "expected a number, got '" + v + "'");
        }
    }

    std::vector<std::int64_t> i64_list(const std::string& key) {
        std::vector<std::int64_t> out;
        for (const std::string& item : split_list(str(key))) {
            try {
                std::size_t pos = 0;
                out.push_back(std::stoll(item, &pos));
                if (pos != item.size()) throw std::invalid_argument(item);
            } catch (const std::exception&) {
                fail(key, "expected a comma-separated integer list, got '" + item + "'");
            }
        }
        return out;
    }

    [[noreturn]] void fail(const std::string& key, const std::string& msg) {
        const auto it = values_.find(key);
        const std::string where = it != values_.end() ? it->second.second : "<default>";
        throw config_error(where + ": " + key + ": " + msg);
    }

    void reject_unknown() const {
        for (const auto& [key, vo] : values_)
            if (consumed_.find(key) == consumed_.end())
                throw config_error(vo.second + ": unknown config key '" + key + "'");
    }

private:
    std::map<std::string, std::pair<std::string, std::string>> values_;
    std::set<std::string> consumed_;
};

}  // namespace

ExperimentConfig build_experiment_config(const RawConfig& raw) {
    TypedReader r(raw);
    ExperimentConfig cfg;

    if (r.has("model.unit_us")) cfg.params.unit = r.i64("model.unit_us");
    if (r.has("scanner.ts_us")) cfg.params.ts = r.i64("scanner.ts_us");
    if (r.has("scanner.tw_us")) cfg.params.tw = r.i64("scanner.tw_us");
    if (r.has("pdu.tau_us")) cfg.params.tau = r.i64("pdu.tau_us");
    if (r.has("pdu.delta_us")) cfg.params.delta = r.i64("pdu.delta_us");

    if (r.has("target.mode")) cfg.target_mode = parse_mode_spec(r.str("target.mode"));
    if (r.has("target.aip_us")) cfg.target_aip = r.i64("target.aip_us");
    if (r.has("target.m")) {
        const std::int64_t m = r.i64("target.m");
        if (m < 1) r.fail("target.m", "m must be >= 1");
        cfg.target_m = static_cast<int>(m);
    }
    if (r.has("target.r_us")) cfg.target_r = r.i64("target.r_us");

    if (r.has("population.n")) cfg.pop_n = r.i64("population.n");
    if (r.has("population.aip_choices_us")) {
        cfg.pop_aip_choices.clear();
        for (std::int64_t v : r.i64_list("population.aip_choices_us")) cfg.pop_aip_choices.push_back(v);
        if (cfg.pop_aip_choices.empty()) r.fail("population.aip_choices_us", "list must be non-empty");
    }
    if (r.has("population.mode")) cfg.pop_mode = parse_mode_spec(r.str("population.mode"));

    if (r.has("sim.runs")) cfg.runs = r.i64("sim.runs");
    if (r.has("sim.seed")) cfg.seed = r.u64("sim.seed");
    if (r.has("sim.horizon_us")) cfg.horizon = r.i64("sim.horizon_us");
    if (r.has("sim.workers")) cfg.workers = static_cast<int>(r.i64("sim.workers"));

    if (r.has("sweep.aip_us")) {
        cfg.sweep_aips.clear();
        for (std::int64_t v : r.i64_list("sweep.aip_us")) cfg.sweep_aips.push_back(v);
    }
    if (r.has("sweep.n")) cfg.sweep_ns = r.i64_list("sweep.n");
    if (r.has("sweep.modes")) {
        cfg.sweep_modes.clear();
        for (const std::string& item : split_list(r.str("sweep.modes")))
            cfg.sweep_modes.push_back(parse_mode_spec(item));
    }

    if (r.has("compare.tolerance_rel")) cfg.compare_tolerance = r.f64("compare.tolerance_rel");
    if (r.has("solver.tolerance")) cfg.solver_tolerance = r.f64("solver.tolerance");
    if (r.has("solver.max_iterations")) cfg.solver_max_iterations = r.i64("solver.max_iterations");

    r.reject_unknown();
    return cfg;
}

AdvMode make_mode(const ModeSpec& spec, usec aip, usec r, int target_m) {
    switch (spec.kind) {
        case ModeSpec::Kind::Pda:
            return Pda{aip};
        case ModeSpec::Kind::Rda: {
            if (r % 2 != 0)
                throw invalid_params("r must be even to split the AIP as t_ell = aip - r/2");
            return Rda{aip - r / 2, r};
        }
        case ModeSpec::Kind::Dra:
            return dra_from_aip(aip, r, spec.resolved_m(target_m));
    }
    throw invalid_params("unreachable mode kind");
}

namespace {

SolverConfig solver_config(const ExperimentConfig& cfg) {
    SolverConfig sc;
    sc.tolerance = cfg.solver_tolerance;
    sc.max_iterations = cfg.solver_max_iterations;
    sc.threads = cfg.workers;
    return sc;
}

/// Analytical latency table for a mode spec, or nothing for PDA.
std::optional<LatencyTable> analytical_table(const ExperimentConfig& cfg, const ModeSpec& spec,
                                             usec aip) {
    if (spec.kind == ModeSpec::Kind::Pda) return std::nullopt;
    const Geometry g = derive_geometry(cfg.params);
    const AdvMode mode = make_mode(spec, aip, cfg.target_r, cfg.target_m);
    if (const auto* rd = std::get_if<Rda>(&mode)) return solve_mu(*rd, g, solver_config(cfg));
    return solve_mu(std::get<Dra>(mode), g, solver_config(cfg));
}

// Population draws are keyed off the experiment seed through a dedicated
// stream tag so that they never interact with per-run simulation streams.
constexpr std::uint64_t kPopulationTag = 0x706f70646177ULL;  // "popdaw"

std::vector<usec> draw_population_aips(const ExperimentConfig& cfg, std::int64_t n,
                                       std::uint64_t point_index, std::uint64_t row_index) {
    Xoshiro256ss rng(cfg.seed, kPopulationTag + point_index, row_index);
    std::vector<usec> aips;
    aips.reserve(static_cast<std::size_t>(n));
    const auto k = static_cast<std::int64_t>(cfg.pop_aip_choices.size());
    for (std::int64_t i = 0; i < n; ++i)
        aips.push_back(cfg.pop_aip_choices[rng.uniform_int(0, k - 1)]);
    return aips;
}

Population population_from_aips(const ExperimentConfig& cfg, const std::vector<usec>& aips) {
    Population pop;
    pop.target_aip = cfg.target_aip;
    pop.tau = cfg.params.tau;
    for (usec a : aips) {
        if (a == cfg.target_aip)
            ++pop.n2;
        else
            pop.group1_aips.push_back(a);
    }
    return pop;
}

std::vector<std::pair<usec, int>> aip_histogram(const std::vector<usec>& aips) {
    std::map<usec, int> h;
    for (usec a : aips) ++h[a];
    return {h.begin(), h.end()};
}

SimScenario scenario_for(const ExperimentConfig& cfg, const ModeSpec& target_spec, usec target_aip,
                         const ModeSpec& surrounding_spec, const std::vector<usec>& surrounding_aips) {
    SimScenario sc;
    sc.params = cfg.params;
    sc.target = make_mode(target_spec, target_aip, cfg.target_r, cfg.target_m);
    for (usec a : surrounding_aips)
        sc.surrounding.push_back(make_mode(surrounding_spec, a, cfg.target_r, cfg.target_m));
    sc.horizon = cfg.horizon;
    sc.seed = cfg.seed;
    return sc;
}

}  // namespace

SimScenario build_scenario(const ExperimentConfig& cfg) {
    const ModeSpec pop_spec = cfg.pop_mode ? *cfg.pop_mode : cfg.target_mode;
    std::vector<usec> aips;
    if (cfg.pop_n > 0) aips = draw_population_aips(cfg, cfg.pop_n, 0, 0);
    return scenario_for(cfg, cfg.target_mode, cfg.target_aip, pop_spec, aips);
}

AnalyzeReport run_analyze(const ExperimentConfig& cfg) {
    if (cfg.target_mode.kind == ModeSpec::Kind::Pda)
        throw invalid_params("no analytical model for a PDA target; use rda or dra");
    AnalyzeReport rep;
    const Geometry g = derive_geometry(cfg.params);
    const auto table = analytical_table(cfg, cfg.target_mode, cfg.target_aip);
    rep.x_single_us = expected_latency_single(*table);
    if (cfg.pop_n > 0) {
        const auto aips = draw_population_aips(cfg, cfg.pop_n, 0, 0);
        rep.population_draw = aip_histogram(aips);
        rep.collision = analyze_population(*table, g, population_from_aips(cfg, aips));
    }
    return rep;
}

std::vector<SingleSweepRow> run_sweep_single(const ExperimentConfig& cfg) {
    if (cfg.sweep_aips.empty()) throw config_error("sweep.aip_us must be a non-empty list");
    if (cfg.runs < 1) throw config_error("sim.runs must be >= 1");
    std::vector<ModeSpec> modes = cfg.sweep_modes;
    if (modes.empty()) modes.push_back(cfg.target_mode);

    std::vector<SingleSweepRow> rows;
    for (const ModeSpec& spec : modes) {
        for (usec aip : cfg.sweep_aips) {
            SingleSweepRow row;
            row.mode = spec;
            row.m = spec.kind == ModeSpec::Kind::Dra ? spec.resolved_m(cfg.target_m) : 1;
            row.aip_us = aip;
            if (const auto table = analytical_table(cfg, spec, aip))
                row.analytical_us = expected_latency_single(*table);
            const SimScenario sc = scenario_for(cfg, spec, aip, spec, {});
            const BatchStats st = simulate_batch(sc, cfg.runs, cfg.workers);
            row.sim_mean_us = st.mean_latency_us;
            row.sim_ci95_us = st.ci95_halfwidth_us;
            row.runs = st.runs;
            if (cfg.progress)
                std::fprintf(stderr, "point mode=%s aip=%lld done\n", mode_spec_text(spec).c_str(),
                             static_cast<long long>(aip));
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::vector<MultiSweepRow> run_sweep_multi(const ExperimentConfig& cfg) {
    if (cfg.sweep_ns.empty()) throw config_error("sweep.n must be a non-empty list");
    if (cfg.runs < 1) throw config_error("sim.runs must be >= 1");
    std::vector<ModeSpec> modes = cfg.sweep_modes;
    if (modes.empty()) modes.push_back(cfg.pop_mode ? *cfg.pop_mode : cfg.target_mode);

    std::vector<MultiSweepRow> rows;
    // The target chain is fixed across sweep points; solve it once per mode.
    for (std::size_t mi = 0; mi < modes.size(); ++mi) {
        const ModeSpec& spec = modes[mi];
        std::optional<LatencyTable> table = analytical_table(cfg, spec, cfg.target_aip);
        const Geometry g = derive_geometry(cfg.params);
        for (std::size_t pi = 0; pi < cfg.sweep_ns.size(); ++pi) {
            const std::int64_t n = cfg.sweep_ns[pi];
            if (n < 0) throw config_error("sweep.n entries must be >= 0");
            const auto aips = draw_population_aips(cfg, n, pi, mi);

            MultiSweepRow row;
            row.n = n;
            row.mode = spec;
            row.population_draw = aip_histogram(aips);
            if (table) {
                if (n == 0) {
                    row.analytical_us = expected_latency_single(*table);
                } else {
                    const auto rep = analyze_population(*table, g, population_from_aips(cfg, aips));
                    row.analytical_us = rep.latency_us;
                }
            }
            const SimScenario sc = scenario_for(cfg, spec, cfg.target_aip, spec, aips);
            const BatchStats st = simulate_batch(sc, cfg.runs, cfg.workers);
            row.sim_mean_us = st.mean_latency_us;
            row.sim_ci95_us = st.ci95_halfwidth_us;
            row.censored_persistent = st.censored_persistent;
            row.censored_horizon = st.censored_horizon;
            row.runs = st.runs;
            if (cfg.progress)
                std::fprintf(stderr, "point mode=%s n=%lld done\n", mode_spec_text(spec).c_str(),
                             static_cast<long long>(n));
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

CompareRow run_compare(const ExperimentConfig& cfg) {
    if (cfg.runs < 1) throw config_error("sim.runs must be >= 1");
    const AnalyzeReport rep = run_analyze(cfg);
    const SimScenario sc = build_scenario(cfg);
    const BatchStats st = simulate_batch(sc, cfg.runs, cfg.workers);

    CompareRow row;
    row.scenario = cfg.pop_n > 0 ? "multi" : "single";
    row.analytical_us = cfg.pop_n > 0 ? rep.collision->latency_us : rep.x_single_us;
    row.sim_mean_us = st.mean_latency_us;
    row.sim_ci95_us = st.ci95_halfwidth_us;
    row.censored_persistent = st.censored_persistent;
    row.censored_horizon = st.censored_horizon;
    row.runs = st.runs;
    row.rel_gap = st.mean_latency_us > 0.0
                      ? std::abs(row.analytical_us - st.mean_latency_us) / st.mean_latency_us
                      : (row.analytical_us == 0.0 ? 0.0 : HUGE_VAL);
    return row;
}

// --- Output ---------------------------------------------------------------------

std::string fmt_g6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

namespace {

std::string list_text(const std::vector<std::int64_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(v[i]);
    }
    return out;
}

std::string modes_text(const std::vector<ModeSpec>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += mode_spec_text(v[i]);
    }
    return out;
}

std::string histogram_text(const std::vector<std::pair<usec, int>>& h) {
    std::string out;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(h[i].first) + ":" + std::to_string(h[i].second);
    }
    return out;
}

std::string opt_text(const std::optional<double>& v) { return v ? fmt_g6(*v) : std::string(); }

}  // namespace

void echo_config(std::ostream& os, const ExperimentConfig& cfg, const std::string& command) {
    os << "# blelat " << kVersion << "\n";
    os << "# command: " << command << "\n";
    os << "# config: model.unit_us=" << cfg.params.unit << "\n";
    os << "# config: scanner.ts_us=" << cfg.params.ts << "\n";
    os << "# config: scanner.tw_us=" << cfg.params.tw << "\n";
    os << "# config: pdu.tau_us=" << cfg.params.tau << "\n";
    os << "# config: pdu.delta_us=" << cfg.params.delta << "\n";
    os << "# config: target.mode=" << mode_spec_text(cfg.target_mode) << "\n";
    os << "# config: target.aip_us=" << cfg.target_aip << "\n";
    os << "# config: target.m=" << cfg.target_m << "\n";
    os << "# config: target.r_us=" << cfg.target_r << "\n";
    os << "# config: population.n=" << cfg.pop_n << "\n";
    os << "# config: population.mode="
       << (cfg.pop_mode ? mode_spec_text(*cfg.pop_mode) : mode_spec_text(cfg.target_mode)) << "\n";
    os << "# config: population.aip_choices_us=" << list_text(cfg.pop_aip_choices) << "\n";
    os << "# config: sim.runs=" << cfg.runs << "\n";
    os << "# config: sim.seed=" << cfg.seed << "\n";
    os << "# config: sim.horizon_us=" << cfg.horizon << "\n";
    // sim.workers is deliberately not echoed: results never depend on it, and
    // identical configs must produce byte-identical files at any worker count.
    os << "# config: sweep.aip_us=" << list_text(cfg.sweep_aips) << "\n";
    os << "# config: sweep.n=" << list_text(cfg.sweep_ns) << "\n";
    os << "# config: sweep.modes=" << modes_text(cfg.sweep_modes) << "\n";
    os << "# config: compare.tolerance_rel=" << fmt_g6(cfg.compare_tolerance) << "\n";
    os << "# config: solver.tolerance=" << fmt_g6(cfg.solver_tolerance) << "\n";
    os << "# config: solver.max_iterations=" << cfg.solver_max_iterations << "\n";
}

void write_analyze_csv(std::ostream& os, const ExperimentConfig& cfg, const AnalyzeReport& rep) {
    echo_config(os, cfg, "analyze");
    if (!rep.population_draw.empty())
        os << "# population: " << histogram_text(rep.population_draw) << "\n";
    os << "x_single_us,p_no_col,p1,gamma,r_us,h_us,latency_us\n";
    os << fmt_g6(rep.x_single_us);
    if (rep.collision) {
        const CollisionReport& c = *rep.collision;
        os << ',' << fmt_g6(c.p_no_col) << ',' << fmt_g6(c.p1) << ',' << fmt_g6(c.gamma) << ','
           << fmt_g6(c.r_us) << ',' << fmt_g6(c.h_us) << ',' << fmt_g6(c.latency_us);
    } else {
        os << ",,,,,," << fmt_g6(rep.x_single_us);
    }
    os << "\n";
}

void write_analyze_text(std::ostream& os, const AnalyzeReport& rep) {
    os << "x_single_us = " << fmt_g6(rep.x_single_us) << "\n";
    if (rep.collision) {
        const CollisionReport& c = *rep.collision;
        os << "p_no_col = " << fmt_g6(c.p_no_col) << "\n";
        os << "p1 = " << fmt_g6(c.p1) << "\n";
        os << "gamma = " << fmt_g6(c.gamma) << "\n";
        os << "r_us = " << fmt_g6(c.r_us) << "\n";
        os << "h_us = " << fmt_g6(c.h_us) << "\n";
        os << "h1_us = " << fmt_g6(c.h1_us) << "\n";
        os << "h2_us = " << fmt_g6(c.h2_us) << "\n";
        os << "latency_us = " << fmt_g6(c.latency_us) << "\n";
    } else {
        os << "latency_us = " << fmt_g6(rep.x_single_us) << "\n";
    }
}

void write_single_sweep_csv(std::ostream& os, const ExperimentConfig& cfg,
                            const std::vector<SingleSweepRow>& rows) {
    echo_config(os, cfg, "sweep-single");
    os << "mode,m,aip_us,analytical_us,sim_mean_us,sim_ci95_us,runs\n";
    for (const auto& r : rows) {
        os << mode_spec_text(ModeSpec{r.mode.kind, 0}) << ',';
        if (r.mode.kind == ModeSpec::Kind::Dra) os << r.m;
        os << ',' << r.aip_us << ',' << opt_text(r.analytical_us) << ',' << fmt_g6(r.sim_mean_us)
           << ',' << fmt_g6(r.sim_ci95_us) << ',' << r.runs << "\n";
    }
}

void write_multi_sweep_csv(std::ostream& os, const ExperimentConfig& cfg,
                           const std::vector<MultiSweepRow>& rows) {
    echo_config(os, cfg, "sweep-multi");
    for (const auto& r : rows)
        os << "# point: n=" << r.n << " mode=" << mode_spec_text(r.mode)
           << " aips=" << histogram_text(r.population_draw) << "\n";
    os << "n_surrounding,mode,analytical_us,sim_mean_us,sim_ci95_us,censored_persistent,"
          "censored_horizon,runs\n";
    for (const auto& r : rows) {
        os << r.n << ',' << mode_spec_text(ModeSpec{r.mode.kind, r.mode.kind == ModeSpec::Kind::Dra ? r.mode.resolved_m(cfg.target_m) : 0})
           << ',' << opt_text(r.analytical_us) << ',' << fmt_g6(r.sim_mean_us) << ','
           << fmt_g6(r.sim_ci95_us) << ',' << r.censored_persistent << ',' << r.censored_horizon
           << ',' << r.runs << "\n";
    }
}

void write_compare_csv(std::ostream& os, const ExperimentConfig& cfg, const CompareRow& row) {
    echo_config(os, cfg, "compare");
    os << "scenario,analytical_us,sim_mean_us,sim_ci95_us,rel_gap,censored_persistent,"
          "censored_horizon,runs\n";
    os << row.scenario << ',' << fmt_g6(row.analytical_us) << ',' << fmt_g6(row.sim_mean_us) << ','
       << fmt_g6(row.sim_ci95_us) << ',' << fmt_g6(row.rel_gap) << ',' << row.censored_persistent
       << ',' << row.censored_horizon << ',' << row.runs << "\n";
}

void write_mu_csv(std::ostream& os, const LatencyTable& table) {
    os << "offset,mode_index,mu\n";
    for (int y = 0; y < table.m; ++y)
        for (std::int64_t x = 0; x < table.cycle; ++x)
            os << x << ',' << y << ',' << fmt_g6(table.at(x, y)) << "\n";
}

void write_trace_text(std::ostream& os, const RunTrace& trace, const RunOutcome& outcome,
                      std::uint64_t run_index) {
    os << "# run " << run_index << "\n";
    os << "phi=" << trace.phi << " target_initial_mode=" << trace.target_initial_mode << "\n";
    std::size_t bi = 0;
    for (const auto& ev : trace.target_events) {
        os << "t=" << ev.t << " actor=target kind=adv_event mode_index=" << ev.mode_index
           << " interval=" << ev.interval << "\n";
        while (bi < trace.blocked.size() && trace.blocked[bi].t == ev.t) {
            os << "t=" << ev.t << " actor=target kind=blocked channel="
               << 37 + static_cast<int>(trace.blocked[bi].channel) << "\n";
            ++bi;
        }
    }
    switch (outcome.kind) {
        case RunOutcome::Kind::Discovered:
            os << "t=" << outcome.latency << " actor=scanner kind=discovery channel="
               << 37 + static_cast<int>(outcome.channel) << " latency=" << outcome.latency << "\n";
            break;
        case RunOutcome::Kind::CensoredHorizon:
            os << "outcome=censored_horizon\n";
            break;
        case RunOutcome::Kind::CensoredPersistent:
            os << "outcome=censored_persistent\n";
            break;
    }
}

}  // namespace blelat
