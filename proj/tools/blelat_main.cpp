#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "blelat/experiment.hpp"
#include "blelat/version.hpp"

namespace {

using namespace blelat;

struct CommonArgs {
    std::string config_path;
    std::string out_path;
    std::vector<std::string> sets;
    bool paper_scale = false;
    // Direct shortcuts for the most common keys.
    std::int64_t runs = -1;
    std::int64_t seed = -1;
    int workers = -1;
    double tolerance = -1.0;
    std::int64_t trace_runs = 0;
    std::string trace_path;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "scenario config file (key = value lines)");
    cmd->add_option("--out", args.out_path, "write the CSV report here instead of stdout");
    cmd->add_option("--set", args.sets, "override a config key, e.g. --set scanner.ts_us=310000")
        ->take_all();
    cmd->add_option("--runs", args.runs, "simulation runs per point (sim.runs)");
    cmd->add_option("--seed", args.seed, "experiment seed (sim.seed)");
    cmd->add_option("--workers", args.workers, "worker threads (sim.workers); 0 = all cores");
    cmd->add_flag("--paper-scale", args.paper_scale, "raise sim.runs to 1000000");
}

ExperimentConfig config_from(const CommonArgs& args) {
    RawConfig raw;
    if (!args.config_path.empty()) raw.load_file(args.config_path);
    for (const std::string& kv : args.sets) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw config_error("--set expects key=value, got '" + kv + "'");
        raw.set(kv.substr(0, eq), kv.substr(eq + 1), "--set");
    }
    if (args.runs >= 0) raw.set("sim.runs", std::to_string(args.runs), "--runs");
    if (args.seed >= 0) raw.set("sim.seed", std::to_string(args.seed), "--seed");
    if (args.workers >= 0) raw.set("sim.workers", std::to_string(args.workers), "--workers");
    if (args.tolerance >= 0) raw.set("compare.tolerance_rel", fmt_g6(args.tolerance), "--tolerance");
    ExperimentConfig cfg = build_experiment_config(raw);
    if (args.paper_scale) cfg.runs = 1'000'000;
    cfg.progress = true;
    return cfg;
}

// Output goes to --out when given, stdout otherwise.
int with_output(const CommonArgs& args, const std::function<void(std::ostream&)>& fn) {
    if (args.out_path.empty()) {
        fn(std::cout);
        return 0;
    }
    std::ofstream out(args.out_path, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot open output file '" << args.out_path << "'\n";
        return 2;
    }
    fn(out);
    return 0;
}

void write_traces(const CommonArgs& args, const ExperimentConfig& cfg) {
    if (args.trace_runs <= 0) return;
    std::ofstream out(args.trace_path, std::ios::binary);
    if (!out) throw config_error("cannot open trace file '" + args.trace_path + "'");
    const SimScenario sc = build_scenario(cfg);
    for (std::int64_t i = 0; i < args.trace_runs; ++i) {
        RunTrace trace;
        const RunOutcome outcome = simulate_run(sc, static_cast<std::uint64_t>(i), &trace);
        write_trace_text(out, trace, outcome, static_cast<std::uint64_t>(i));
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"BLE advertising discovery-latency toolkit: analytical Markov model and Monte Carlo simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("blelat ") + blelat::kVersion);

    CommonArgs a_analyze, a_single, a_multi, a_compare, a_dump;

    auto* c_analyze = app.add_subcommand("analyze", "analytical latency for one scenario");
    add_common(c_analyze, a_analyze);

    auto* c_single = app.add_subcommand("sweep-single", "single-advertiser sweep over AIP values");
    add_common(c_single, a_single);

    auto* c_multi = app.add_subcommand("sweep-multi", "multi-advertiser sweep over population sizes");
    add_common(c_multi, a_multi);

    auto* c_compare = app.add_subcommand("compare", "run both engines on one scenario and verify the gap");
    add_common(c_compare, a_compare);
    c_compare->add_option("--tolerance", a_compare.tolerance,
                          "relative gap allowed before exiting 1 (compare.tolerance_rel)");
    c_compare->add_option("--trace-runs", a_compare.trace_runs, "dump event traces for the first N runs");
    c_compare->add_option("--trace-out", a_compare.trace_path, "trace output file (with --trace-runs)");

    auto* c_dump = app.add_subcommand("dump-mu", "dump the solved expected-transition table as CSV");
    add_common(c_dump, a_dump);

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_analyze->parsed()) {
            const auto cfg = config_from(a_analyze);
            const auto rep = run_analyze(cfg);
            write_analyze_text(std::cout, rep);
            if (!a_analyze.out_path.empty())
                return with_output(a_analyze, [&](std::ostream& os) { write_analyze_csv(os, cfg, rep); });
            return 0;
        }
        if (c_single->parsed()) {
            const auto cfg = config_from(a_single);
            const auto rows = run_sweep_single(cfg);
            return with_output(a_single, [&](std::ostream& os) { write_single_sweep_csv(os, cfg, rows); });
        }
        if (c_multi->parsed()) {
            const auto cfg = config_from(a_multi);
            const auto rows = run_sweep_multi(cfg);
            return with_output(a_multi, [&](std::ostream& os) { write_multi_sweep_csv(os, cfg, rows); });
        }
        if (c_compare->parsed()) {
            const auto cfg = config_from(a_compare);
            if (!a_compare.trace_path.empty()) write_traces(a_compare, cfg);
            const auto row = run_compare(cfg);
            const int rc = with_output(a_compare, [&](std::ostream& os) { write_compare_csv(os, cfg, row); });
            if (rc != 0) return rc;
            if (row.rel_gap > cfg.compare_tolerance) {
                std::cerr << "compare: FAIL rel_gap=" << blelat::fmt_g6(row.rel_gap)
                          << " tolerance=" << blelat::fmt_g6(cfg.compare_tolerance) << "\n";
                return 1;
            }
            std::cerr << "compare: OK rel_gap=" << blelat::fmt_g6(row.rel_gap) << "\n";
            return 0;
        }
        if (c_dump->parsed()) {
            const auto cfg = config_from(a_dump);
            if (cfg.target_mode.kind == blelat::ModeSpec::Kind::Pda)
                throw blelat::invalid_params("dump-mu needs an rda or dra target");
            const auto g = blelat::derive_geometry(cfg.params);
            const auto mode = blelat::make_mode(cfg.target_mode, cfg.target_aip, cfg.target_r, cfg.target_m);
            blelat::SolverConfig sol;
            sol.tolerance = cfg.solver_tolerance;
            sol.max_iterations = cfg.solver_max_iterations;
            sol.threads = cfg.workers;
            const auto table = std::holds_alternative<blelat::Rda>(mode)
                                   ? blelat::solve_mu(std::get<blelat::Rda>(mode), g, sol)
                                   : blelat::solve_mu(std::get<blelat::Dra>(mode), g, sol);
            return with_output(a_dump, [&](std::ostream& os) { write_mu_csv(os, table); });
        }
    } catch (const blelat::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const blelat::invalid_params& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const blelat::invalid_population& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const blelat::non_convergent& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 1;
    } catch (const blelat::non_absorbing& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
