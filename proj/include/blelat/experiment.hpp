#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "blelat/interference.hpp"
#include "blelat/markov.hpp"
#include "blelat/sim.hpp"
#include "blelat/timing.hpp"

namespace blelat {

/// Configuration file or key/value parse failure; message carries the
/// offending location and key.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// --- Configuration ------------------------------------------------------------
//
// Line-oriented `key = value` files with dotted keys; '#' starts a comment.
// Lists are comma-separated. Every key can be overridden on the command line
// with --set key=value. Unknown keys are rejected.

struct ModeSpec {
    enum class Kind { Pda, Rda, Dra };
    Kind kind = Kind::Dra;
    int m = 0;  // 0: fall back to target.m

    int resolved_m(int target_m) const { return m > 0 ? m : target_m; }
};

ModeSpec parse_mode_spec(const std::string& text);   // "pda" | "rda" | "dra" | "dra:<m>"
std::string mode_spec_text(const ModeSpec& spec);    // canonical form back

struct ExperimentConfig {
    ScenarioParams params;  // scanner.*, pdu.*, model.unit_us

    ModeSpec target_mode{ModeSpec::Kind::Dra, 0};
    usec target_aip = 170'000;
    int target_m = 5;
    usec target_r = 10'000;

    std::int64_t pop_n = 0;
    std::vector<usec> pop_aip_choices{100'000, 170'000, 250'000};
    std::optional<ModeSpec> pop_mode;  // default: the target's mode

    std::int64_t runs = 100'000;
    std::uint64_t seed = 1;
    usec horizon = 1'000'000'000;
    int workers = 0;

    std::vector<usec> sweep_aips;
    std::vector<std::int64_t> sweep_ns;
    std::vector<ModeSpec> sweep_modes;

    double compare_tolerance = 0.10;
    double solver_tolerance = 1e-10;
    std::int64_t solver_max_iterations = 1'000'000;

    bool progress = false;  // one stderr line per finished sweep point
};

/// Raw key/value assignments in input order, each with a provenance label
/// ("file.cfg:12" or "--set") used in diagnostics.
struct RawConfig {
    std::vector<std::pair<std::string, std::string>> entries;
    std::vector<std::string> origins;

    void load_file(const std::string& path);
    void set(const std::string& key, const std::string& value, const std::string& origin);
};

/// Typed conversion; throws config_error on unknown keys or bad values.
ExperimentConfig build_experiment_config(const RawConfig& raw);

/// Advertising mode for one advertiser. RDA and DRA split the AIP as
/// t_ell = aip - r/2 (requires even r).
AdvMode make_mode(const ModeSpec& spec, usec aip, usec r, int target_m);

// --- Experiment runners ---------------------------------------------------------

struct AnalyzeReport {
    double x_single_us = 0.0;
    std::optional<CollisionReport> collision;            // when population.n >= 1
    std::vector<std::pair<usec, int>> population_draw;   // (aip, count) histogram
};

struct SingleSweepRow {
    ModeSpec mode;
    int m;  // resolved; meaningful for DRA
    usec aip_us;
    std::optional<double> analytical_us;  // empty for PDA
    double sim_mean_us;
    double sim_ci95_us;
    std::int64_t runs;
};

struct MultiSweepRow {
    std::int64_t n;
    ModeSpec mode;
    std::optional<double> analytical_us;
    double sim_mean_us;
    double sim_ci95_us;
    std::int64_t censored_persistent;
    std::int64_t censored_horizon;
    std::int64_t runs;
    std::vector<std::pair<usec, int>> population_draw;
};

struct CompareRow {
    std::string scenario;  // "single" or "multi"
    double analytical_us;
    double sim_mean_us;
    double sim_ci95_us;
    double rel_gap;  // |analytical - sim| / sim
    std::int64_t censored_persistent;
    std::int64_t censored_horizon;
    std::int64_t runs;
};

AnalyzeReport run_analyze(const ExperimentConfig& cfg);
std::vector<SingleSweepRow> run_sweep_single(const ExperimentConfig& cfg);
std::vector<MultiSweepRow> run_sweep_multi(const ExperimentConfig& cfg);
CompareRow run_compare(const ExperimentConfig& cfg);

/// Builds the simulation scenario the config describes (population drawn from
/// the seed when population.n >= 1).
SimScenario build_scenario(const ExperimentConfig& cfg);

// --- Output ----------------------------------------------------------------------
//
// CSV files are byte-stable for a fixed (config, seed): header comments echo
// the full effective config, numbers use 6 significant digits, lines end in
// LF.

std::string fmt_g6(double v);

void echo_config(std::ostream& os, const ExperimentConfig& cfg, const std::string& command);
void write_analyze_csv(std::ostream& os, const ExperimentConfig& cfg, const AnalyzeReport& rep);
void write_analyze_text(std::ostream& os, const AnalyzeReport& rep);
void write_single_sweep_csv(std::ostream& os, const ExperimentConfig& cfg,
                            const std::vector<SingleSweepRow>& rows);
void write_multi_sweep_csv(std::ostream& os, const ExperimentConfig& cfg,
                           const std::vector<MultiSweepRow>& rows);
void write_compare_csv(std::ostream& os, const ExperimentConfig& cfg, const CompareRow& row);
void write_mu_csv(std::ostream& os, const LatencyTable& table);
void write_trace_text(std::ostream& os, const RunTrace& trace, const RunOutcome& outcome,
                      std::uint64_t run_index);

}  // namespace blelat
