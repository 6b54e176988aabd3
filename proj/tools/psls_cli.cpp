// Command-line frontend: synthesis, simulation campaigns, baseline comparison,
// invariant self-checks and controller export driven by a scenario JSON file.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "psls/psls.hpp"

namespace {

using namespace psls;
using io::json;

enum Exit { kOk = 0, kInternal = 1, kConfig = 2, kSolver = 3, kMismatch = 4 };

struct HashMismatch : Error {
    using Error::Error;
};

struct SolverFailure : Error {
    using Error::Error;
};

struct Flags {
    std::string config;
    std::string out;
    std::string solution;
    std::optional<std::uint64_t> seed;
    std::optional<int> runs;
    std::string format = "csv";
    bool inject_failure = false;
};

io::Scenario load(const Flags& f) {
    if (f.config.empty()) throw ConfigError("--config is required");
    auto s = io::load_scenario(f.config);
    if (!f.out.empty()) s.output_dir = f.out;
    if (f.seed) s.seed = *f.seed;
    if (f.runs) {
        if (*f.runs < 1) throw ConfigError("--runs must be >= 1");
        s.runs = *f.runs;
    }
    return s;
}

std::string path_in(const io::Scenario& s, const std::string& file) {
    return (std::filesystem::path(s.output_dir) / file).string();
}

SynthesisSolution synthesize(const io::Scenario& s) {
    auto sol = s.problem == Problem::H2 ? synth_h2(s.model, s.language, s.noise, s.cost, s.options())
                                        : synth_l1(s.model, s.language, s.noise, s.options());
    return sol;
}

void print_summary(const io::Scenario& s, const SynthesisSolution& sol) {
    std::cout << "problem=" << io::problem_key(sol.problem) << " status=" << solver::to_string(sol.diagnostics.status)
              << " signals=" << s.language.size() << " delay=" << s.delay << " objective=" << io::format_double(sol.objective)
              << " seconds=" << sol.diagnostics.seconds;
    if (sol.problem == Problem::L1 && sol.worst_signal >= 0)
        std::cout << " worst_signal=" << sol.worst_signal << " (" << s.language.signal(sol.worst_signal).to_string() << ")";
    std::cout << "\n";
    for (const auto& w : sol.diagnostics.warnings) std::cerr << "warning: " << w << "\n";
}

int cmd_synth(const Flags& f) {
    const auto s = load(f);
    const auto sol = synthesize(s);
    io::write_file(path_in(s, "solution.json"), io::solution_to_json(s, sol).dump(2) + "\n");
    print_summary(s, sol);
    if (!sol.ok()) throw SolverFailure("synthesis failed: " + solver::to_string(sol.diagnostics.status));
    return kOk;
}

io::SolutionFile load_solution(const Flags& f, const io::Scenario& s) {
    const std::string path = f.solution.empty() ? path_in(s, "solution.json") : f.solution;
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": invalid JSON: " + e.what());
    }
    const std::string expected = io::scenario_hash(s);
    const std::string found = j.value("scenario_hash", std::string());
    if (found != expected)
        throw HashMismatch("solution " + path + " was synthesized for scenario " + found + ", not " + expected);
    return io::solution_from_json(j, s);
}

MonteCarloResult campaign(const io::Scenario& s, const PrefixController& ctrl, bool keep_traces) {
    return monte_carlo(s.model, s.language, ctrl, s.noise, s.cost, s.runs, s.seed, s.sampling, keep_traces);
}

json manifest_base(const io::Scenario& s) {
    return {{"rng", kRngAlgorithm},
            {"seed", s.seed},
            {"runs", s.runs},
            {"config_hash", io::scenario_hash(s)},
            {"problem", io::problem_key(s.problem)},
            {"sampling", io::sampling_key(s.sampling)},
            {"horizon", s.horizon()},
            {"signals", s.language.size()}};
}

void check_format(const Flags& f) {
    if (f.format != "csv" && f.format != "json") throw ConfigError("--format must be csv or json");
}

int cmd_simulate(const Flags& f) {
    check_format(f);
    const auto s = load(f);
    const auto sol = load_solution(f, s);
    const bool csv = f.format == "csv";
    const auto mc = campaign(s, sol.controller, csv);
    json manifest = manifest_base(s);
    manifest["objective"] = sol.objective;
    if (s.problem == Problem::L1) manifest["worst_case_bound"] = sol.objective;
    manifest["mean_total_cost"] = mc.mean_total_cost;
    manifest["total_cost_std_error"] = mc.total_cost_std_error;
    manifest["max_state_norm"] = mc.max_state_norm;
    if (csv) {
        std::string traces = io::traces_csv_header(s.model.n());
        io::append_traces_csv(traces, mc, s.model.n());
        std::string stats = io::stats_csv_header();
        io::append_stats_csv(stats, mc);
        io::write_file(path_in(s, "traces.csv"), traces);
        io::write_file(path_in(s, "stats.csv"), stats);
        manifest["files"] = {"traces.csv", "stats.csv"};
    } else {
        io::write_file(path_in(s, "stats.json"), io::monte_carlo_to_json(mc).dump(2) + "\n");
        manifest["files"] = {"stats.json"};
    }
    io::write_file(path_in(s, "manifest.json"), manifest.dump(2) + "\n");
    std::cout << "runs=" << s.runs << " seed=" << s.seed << " mean_total_cost=" << io::format_double(mc.mean_total_cost)
              << " max_state_norm=" << io::format_double(mc.max_state_norm) << "\n";
    return kOk;
}

json controller_summary(const std::string& label, double objective, const MonteCarloResult& mc) {
    return {{"controller", label},
            {"objective", objective},
            {"mean_total_cost", mc.mean_total_cost},
            {"total_cost_std_error", mc.total_cost_std_error},
            {"max_state_norm", mc.max_state_norm},
            {"statistics", io::monte_carlo_to_json(mc)}};
}

int cmd_compare(const Flags& f) {
    check_format(f);
    const auto s = load(f);
    const auto sol = synthesize(s);
    print_summary(s, sol);
    if (!sol.ok()) throw SolverFailure("synthesis failed: " + solver::to_string(sol.diagnostics.status));

    BaselineResult base;
    std::string base_label;
    if (s.problem == Problem::H2) {
        base = nominal_h2_baseline(s.model, s.language, s.noise, s.cost, s.options());
        base_label = "nominal";
    } else {
        MemorylessOptions mo;
        mo.delay = s.delay;
        base = memoryless_l1_baseline(s.model, s.language, s.noise, mo);
        base_label = "memoryless";
    }
    const bool csv = f.format == "csv";
    const auto mc_prefix = campaign(s, sol.controller, csv);
    const auto mc_base = campaign(s, base.controller, csv);

    json summary = manifest_base(s);
    summary["prefix"] = controller_summary("prefix", sol.objective, mc_prefix);
    summary["baseline"] = controller_summary(base_label, base.objective, mc_base);
    summary["baseline"]["sweeps"] = base.sweeps;
    summary["baseline"]["converged"] = base.converged;
    summary["objective_ordering_holds"] = sol.objective <= base.objective + 1e-9 * std::max(1.0, base.objective);
    if (s.problem == Problem::H2) {
        summary["simulated_ordering_holds"] = mc_prefix.mean_total_cost < mc_base.mean_total_cost;
    } else {
        // The memory controller's value certifies its own trajectories only.
        double base_witness_peak = 0.0;
        for (int k = 0; k < s.language.size(); ++k) {
            const auto wc = worst_case_state_norm(base.responses[k], s.noise.w_bar, s.noise.v_bar);
            base_witness_peak =
                std::max(base_witness_peak, simulate(s.model, s.language.signal(k), base.controller, wc.witness).max_state_norm());
        }
        summary["worst_case_bound"] = sol.objective;
        summary["baseline"]["witness_peak"] = base_witness_peak;
        summary["baseline_exceeds_bound"] =
            std::max(mc_base.max_state_norm, base_witness_peak) > sol.objective + 1e-6;
        summary["prefix_within_bound"] = mc_prefix.max_state_norm <= sol.objective + 1e-6;
    }
    if (csv) {
        std::string traces = io::traces_csv_header(s.model.n(), true);
        io::append_traces_csv(traces, mc_prefix, s.model.n(), "prefix");
        io::append_traces_csv(traces, mc_base, s.model.n(), base_label);
        std::string stats = io::stats_csv_header(true);
        io::append_stats_csv(stats, mc_prefix, "prefix");
        io::append_stats_csv(stats, mc_base, base_label);
        io::write_file(path_in(s, "compare_traces.csv"), traces);
        io::write_file(path_in(s, "compare_stats.csv"), stats);
        summary["files"] = {"compare_traces.csv", "compare_stats.csv"};
    }
    io::write_file(path_in(s, "compare_summary.json"), summary.dump(2) + "\n");
    std::cout << "prefix_objective=" << io::format_double(sol.objective) << " " << base_label
              << "_objective=" << io::format_double(base.objective)
              << " prefix_mean_total_cost=" << io::format_double(mc_prefix.mean_total_cost) << " " << base_label
              << "_mean_total_cost=" << io::format_double(mc_base.mean_total_cost) << "\n";
    return kOk;
}

int cmd_check(const Flags& f) {
    CheckDims dims;
    std::uint64_t seed = f.seed.value_or(1);
    if (!f.config.empty()) {
        const auto s = load(f);
        dims = CheckDims{s.model.n(), s.model.p(), s.model.m(), s.horizon(), s.model.mode_count()};
        if (!f.seed) seed = s.seed;
    }
    const int instances = f.runs.value_or(50);
    if (instances < 1) throw ConfigError("--runs must be >= 1");
    const auto results = run_invariant_suite(dims, instances, seed, f.inject_failure);
    bool all = true;
    for (const auto& r : results) {
        all = all && r.passed;
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << " instances=" << r.instances
                  << " worst=" << r.worst << " tol=" << r.tolerance << "\n";
    }
    return all ? kOk : kInternal;
}

int cmd_export(const Flags& f) {
    check_format(f);
    const auto s = load(f);
    const auto sol = load_solution(f, s);
    const json c = io::controller_to_json(sol.controller);
    if (f.format == "json") {
        io::write_file(path_in(s, "controller.json"), c.dump(2) + "\n");
    } else {
        std::string out = "prefix,t,tau,row,col,value\n";
        for (const auto& g : c["gains"])
            for (const auto& b : g["blocks"]) {
                const Matrix k = io::matrix_from_json(b["K"], "K", sol.controller.m());
                for (Eigen::Index i = 0; i < k.rows(); ++i)
                    for (Eigen::Index j = 0; j < k.cols(); ++j)
                        out += "\"" + g["prefix"].get<std::string>() + "\"," + std::to_string(g["t"].get<int>()) + "," +
                               std::to_string(b["tau"].get<int>()) + "," + std::to_string(i) + "," + std::to_string(j) +
                               "," + io::format_double(k(i, j)) + "\n";
            }
        io::write_file(path_in(s, "controller.csv"), out);
    }
    std::cout << "exported " << c["gains"].size() << " prefixes\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Prefix-based output-feedback synthesis for switched linear systems"};
    app.require_subcommand(1);
    Flags f;
    auto common = [&](CLI::App* sub, bool need_config) {
        auto* c = sub->add_option("--config", f.config, "scenario JSON file");
        if (need_config) c->required();
        sub->add_option("--out", f.out, "output directory (overrides the scenario)");
        sub->add_option("--seed", f.seed, "random seed (overrides the scenario)");
        sub->add_option("--runs", f.runs, "Monte-Carlo runs, or instances for check");
    };
    auto* synth = app.add_subcommand("synth", "synthesize the prefix-based controller");
    common(synth, true);
    auto* sim = app.add_subcommand("simulate", "simulate a synthesized controller");
    common(sim, true);
    sim->add_option("--solution", f.solution, "solution JSON (default <out>/solution.json)");
    sim->add_option("--format", f.format, "csv or json");
    auto* cmp = app.add_subcommand("compare", "compare against the baseline controller");
    common(cmp, true);
    cmp->add_option("--format", f.format, "csv or json");
    auto* chk = app.add_subcommand("check", "run the randomized invariant suite");
    common(chk, false);
    chk->add_flag("--inject-failure", f.inject_failure, "perturb every response so the checks must fail");
    auto* exp = app.add_subcommand("export-controller", "write the gains of a solution");
    common(exp, true);
    exp->add_option("--solution", f.solution, "solution JSON (default <out>/solution.json)");
    exp->add_option("--format", f.format, "csv or json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (synth->parsed()) return cmd_synth(f);
        if (sim->parsed()) return cmd_simulate(f);
        if (cmp->parsed()) return cmd_compare(f);
        if (chk->parsed()) return cmd_check(f);
        if (exp->parsed()) return cmd_export(f);
    } catch (const HashMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kMismatch;
    } catch (const SolverFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSolver;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kSolver;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const DimensionError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const UnknownSignalError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInternal;
    }
    return kInternal;
}
