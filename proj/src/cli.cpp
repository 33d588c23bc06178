#include "womops/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "womops/config.hpp"
#include "womops/errors.hpp"
#include "womops/experiments.hpp"
#include "womops/m1_solver.hpp"
#include "womops/m2_solver.hpp"

namespace womops::cli {
namespace {

using nlohmann::json;

CliConfig read_config(const std::string& path) {
    return path.empty() ? CliConfig{} : load_config(path);
}

void emit(std::ostream& out, const json& doc) { out << doc.dump(2) << "\n"; }

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot open " + path.string() + " for writing");
    file << text;
    if (!file) throw IoError("failed writing " + path.string());
}

int cmd_solve_m1(const CliConfig& cfg, double lambda_p, std::ostream& out) {
    const M1Solution sol = solve_m1(cfg.market, lambda_p);
    json candidates = json::array();
    for (M1Case c : kAllM1Cases) {
        if (lambda_p == 0 && (c == M1Case::II || c == M1Case::IV)) continue;
        const auto policy = candidate(c, cfg.market, lambda_p);
        if (!policy) continue;
        candidates.push_back({{"case", std::string(to_string(c))},
                              {"policy", to_json(*policy)},
                              {"profit", profit_m1(cfg.market, *policy, lambda_p)},
                              {"kkt_residual", kkt_residual(c, cfg.market, lambda_p, *policy)}});
    }
    json doc = to_json(sol);
    doc["kkt_residual"] = kkt_residual(sol.case_id, cfg.market, lambda_p, sol.policy);
    doc["candidates"] = candidates;
    emit(out, doc);
    return kExitOk;
}

int cmd_solve_m2(const CliConfig& cfg, bool with_recovery, std::ostream& out) {
    const M2Problem pb = cfg.problem();
    const M2Solution sol = solve_m2(pb, cfg.search);
    const StructureReport st = check_lemma2(pb, sol);
    json doc = to_json(sol);
    doc["structure"] = {{"phase2_needs_phase1", st.phase2_needs_phase1},
                        {"slack_needs_no_phase1", st.slack_needs_no_phase1},
                        {"t1_within_bound", st.t1_within_bound},
                        {"enforced", st.structure_enforced},
                        {"consistent", st.consistent()},
                        {"findings", st.findings}};
    if (with_recovery) doc["recovery"] = to_json(recoverability(pb, sol, cfg.experiment.recovery));
    emit(out, doc);
    return kExitOk;
}

int cmd_simulate(const CliConfig& cfg, std::optional<double> seed, int iters, double tol,
                 bool stop_early, const std::string& csv_path, std::ostream& out,
                 std::ostream& err) {
    const FeedbackSystem sys = cfg.system();
    const double start = seed.value_or(sys.potential());
    const DynamicsTrace trace = simulate(sys, start, {iters, tol, stop_early});
    if (csv_path.empty()) {
        out << trace_csv(trace);
        err << "classification: " << to_string(trace.classification.kind) << "\n";
    } else {
        write_text(csv_path, trace_csv(trace));
        emit(out, to_json(trace));
    }
    return kExitOk;
}

int reproduce_trace(const CliConfig& cfg, TableId id, const std::filesystem::path& dir,
                    std::ostream& out) {
    const TraceSpec spec = trace_spec(id, cfg.experiment);
    const DynamicsTrace trace = run_trace(cfg.experiment, id);
    const TraceCheck check = compare(spec, trace);
    const std::string stem = "trace_" + std::string(to_string(id));
    write_text(dir / (stem + ".csv"), trace_csv(trace));
    json manifest{{"schema", kConfigSchema},
                  {"tool", "womops"},
                  {"version", std::string(kToolVersion)},
                  {"stem", stem},
                  {"config", to_json(cfg.experiment)},
                  {"trace", to_json(trace)}};
    write_text(dir / (stem + ".manifest.json"), manifest.dump(2) + "\n");

    out << "table " << to_string(id) << ": myopic trace\n";
    out << "lambda_p entries matched: " << check.lambda_matched << "/" << check.entries
        << " within " << spec.lambda_tol << "\n";
    out << "policy entries matched: " << check.t_matched << "/" << check.entries << " within "
        << spec.t_tol << "\n";
    out << "cycle detected: "
        << (trace.classification.kind == LongRunKind::Cycle2 ? "yes" : "no") << "\n";
    out << "classification: " << to_string(trace.classification.kind) << "\n";
    out << "wrote " << (dir / (stem + ".csv")).string() << "\n";
    return kExitOk;
}

int cmd_reproduce(const CliConfig& cfg, const std::string& table, const std::string& out_dir,
                  std::ostream& out) {
    const TableId id = table_id_from_string(table);
    const std::filesystem::path dir = out_dir.empty() ? cfg.experiment.output_dir : out_dir;
    if (is_trace_table(id)) return reproduce_trace(cfg, id, dir, out);

    const TableSpec spec = table_spec(id, cfg.experiment);
    const std::vector<ResultRow> rows = run_table(cfg.experiment, id);
    const std::vector<RowCheck> checks = compare(spec, rows);
    const std::string stem = "table_" + std::string(to_string(id));
    persist(rows, cfg.experiment, dir, stem);

    std::size_t matched = 0, decisions = 0, with_decision = 0;
    out << "table " << to_string(id) << ": " << spec.title << "\n";
    for (std::size_t i = 0; i < checks.size(); ++i) {
        const RowCheck& c = checks[i];
        bool cells_ok = true;
        for (const CellCheck& cell : c.cells) {
            if (cell.ok) continue;
            cells_ok = false;
            char buf[160];
            std::snprintf(buf, sizeof buf, "row %zu: %s expected %.2f got %.2f\n", i + 1,
                          cell.column.c_str(), cell.expected, cell.actual);
            out << buf;
        }
        if (cells_ok) ++matched;
        if (c.expected_decision) {
            ++with_decision;
            if (*c.expected_decision == c.actual_decision) {
                ++decisions;
            } else {
                out << "row " << i + 1 << ": decision expected " << to_string(*c.expected_decision)
                    << " got " << to_string(c.actual_decision) << "\n";
            }
        }
    }
    out << "rows matched: " << matched << "/" << checks.size() << " within tolerance\n";
    if (with_decision > 0) {
        out << "decisions matched: " << decisions << "/" << with_decision << "\n";
    }
    out << "wrote " << (dir / (stem + ".csv")).string() << "\n";
    return kExitOk;
}

int cmd_sweep(const CliConfig& cfg, const std::string& out_dir, std::ostream& out) {
    const std::filesystem::path dir = out_dir.empty() ? cfg.experiment.output_dir : out_dir;
    const std::vector<ResultRow> rows = run_sweep(cfg.experiment);
    persist(rows, cfg.experiment, dir, "sweep");
    out << "solved " << rows.size() << " parameter points\n";
    out << "wrote " << (dir / "sweep.csv").string() << "\n";
    return kExitOk;
}

int cmd_compare(const CliConfig& cfg, std::ostream& out) {
    const ComparisonReport rep = cyclic_vs_stationary(cfg.problem(), cfg.experiment);
    json doc{{"stationary", to_json(rep.stationary)},
             {"cycle_detected", rep.cycle_detected},
             {"long_run_profit", rep.long_run_profit},
             {"margin", rep.margin},
             {"relative_margin", rep.relative_margin},
             {"cyclic_wins", rep.cyclic_wins()},
             {"recovery", to_json(rep.recovery)}};
    emit(out, doc);
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Shipment policy under word-of-mouth demand feedback"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("-c,--config", config_path, "JSON config file (schema 1)")->check(CLI::ExistingFile);

    auto* m1 = app.add_subcommand("solve-m1", "myopic policy for a given premium demand");
    double lambda_p = 0.0;
    m1->add_option("--lambda-p", lambda_p, "premium demand rate")->required()->check(CLI::NonNegativeNumber);
    m1->add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);

    auto* m2 = app.add_subcommand("solve-m2", "policy and fee under the demand equilibrium");
    bool with_recovery = false;
    m2->add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    m2->add_flag("--recovery", with_recovery, "also run the myopic loop at the optimal fee");

    auto* sim = app.add_subcommand("simulate", "iterate the myopic feedback loop at a fixed fee");
    std::optional<double> seed;
    int iters = 10;
    double tol = 1e-4;
    bool stop_early = false;
    std::string trace_out;
    sim->add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    sim->add_option("--seed-lambda", seed, "initial premium demand (default c1(F))")
        ->check(CLI::NonNegativeNumber);
    sim->add_option("--iters", iters, "number of steps")->check(CLI::NonNegativeNumber);
    sim->add_option("--tol", tol, "convergence tolerance")->check(CLI::PositiveNumber);
    sim->add_flag("--stop-early", stop_early, "stop once converged or cycling");
    sim->add_option("--out", trace_out, "write the trace CSV here and print JSON");

    auto* rep = app.add_subcommand("reproduce", "regenerate a study table and diff it");
    std::string table;
    std::string out_dir;
    rep->add_option("--table", table, "T3 T4 T5 T6 T7 T8 or T9")->required();
    rep->add_option("--out", out_dir, "output directory");
    rep->add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);

    auto* sweep = app.add_subcommand("sweep", "solve every point of the experiment grid");
    sweep->add_option("--out", out_dir, "output directory");
    sweep->add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);

    auto* cmp = app.add_subcommand("compare", "stationary optimum against the myopic long run");
    cmp->add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        const CliConfig cfg = read_config(config_path);
        if (m1->parsed()) return cmd_solve_m1(cfg, lambda_p, out);
        if (m2->parsed()) return cmd_solve_m2(cfg, with_recovery, out);
        if (sim->parsed()) {
            return cmd_simulate(cfg, seed, iters, tol, stop_early, trace_out, out, err);
        }
        if (rep->parsed()) return cmd_reproduce(cfg, table, out_dir, out);
        if (sweep->parsed()) return cmd_sweep(cfg, out_dir, out);
        if (cmp->parsed()) return cmd_compare(cfg, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const InvalidParams& e) {
        err << "invalid input: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ConfigMismatch& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitSolver;
    }
    return kExitUsage;
}

}  // namespace womops::cli
