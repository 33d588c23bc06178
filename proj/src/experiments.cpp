#include "womops/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "womops/config.hpp"
#include "womops/errors.hpp"

namespace womops {
namespace {

constexpr auto kOpt = RecoveryClass::OptEq;
constexpr auto kNon = RecoveryClass::NonOptEq;
constexpr auto kCyc = RecoveryClass::Cycles;

// Printed table cells: t1 t2 t3 F lambda_p pi.
struct Printed {
    double key1, key2, key3;  // table-specific row keys
    double t1, t2, t3, F, lambda_p, profit;
    std::optional<RecoveryClass> decision;
};

// (c2, tau, ...)
const std::vector<Printed> kTable3 = {
    {1, 1.0, 0, 0.45, 0.00, 1.00, 10, 450.00, 1331.73, kOpt},
    {1, 1.5, 0, 0.00, 0.00, 1.50, 10, 450.00, 1346.67, kNon},
    {1, 2.0, 0, 0.00, 0.00, 2.00, 10, 450.00, 1230.00, kNon},
    {1, 5.0, 0, 0.00, 0.00, 2.75, 10, 247.58, 307.98, kNon},
    {1, 6.0, 0, 0.00, 0.00, 2.84, 10, 213.15, 204.14, kNon},
    {3, 1.0, 0, 0.45, 0.00, 1.00, 10, 450.00, 1331.73, kOpt},
    {3, 1.5, 0, 0.00, 0.00, 1.50, 10, 450.00, 1346.67, kCyc},
    {3, 2.0, 0, 0.00, 0.00, 2.00, 10, 450.00, 1230.00, kCyc},
    {3, 5.0, 0, 1.71, 0.00, 5.00, 100, 0.00, 58.36, kOpt},
    {3, 6.0, 0, 1.48, 0.00, 6.00, 100, 0.00, 103.34, kOpt},
};

const std::vector<Printed> kTable4 = {
    {1, 1.0, 0, 0.05, 0.00, 1.00, 10.00, 451.09, 2138.87, kOpt},
    {1, 1.5, 0, 0.00, 0.00, 1.50, 10.00, 451.09, 2018.84, kNon},
    {1, 2.0, 0, 0.00, 0.00, 2.00, 10.00, 451.09, 1734.42, kNon},
    {1, 5.0, 0, 0.00, 0.00, 2.47, 10.00, 222.89, 691.88, kNon},
    {1, 6.0, 0, 0.00, 0.00, 2.53, 10.00, 190.54, 576.64, kNon},
    {3, 1.0, 0, 0.05, 0.00, 1.00, 10.00, 451.09, 2138.87, kOpt},
    {3, 1.5, 0, 0.00, 0.00, 1.50, 10.00, 451.09, 2018.84, kCyc},
    {3, 2.0, 0, 0.00, 0.00, 2.00, 10.00, 451.09, 1734.42, kCyc},
    {3, 5.0, 0, 0.00, 0.00, 3.40, 45.21, 126.77, 295.74, kCyc},
    {3, 6.0, 0, 0.78, 0.00, 6.00, 100.00, 0.00, 243.53, kOpt},
};

// (K, r, c2, ...)
const std::vector<Printed> kTable5 = {
    {3000, 16, 0.1, 0.35, 0.23, 1.00, 10.00, 438.76, 4441.47, kNon},
    {3000, 16, 0.2, 0.00, 0.57, 1.00, 10.00, 450.00, 4415.80, kNon},
    {3000, 16, 1.0, 0.00, 0.56, 1.00, 10.00, 450.00, 4415.75, kNon},
    {3000, 48, 0.1, 0.01, 0.00, 1.00, 10.00, 449.69, 20130.16, kNon},
    {3000, 48, 0.2, 0.00, 0.00, 1.00, 10.00, 450.00, 20130.00, kNon},
    {3000, 48, 1.0, 0.00, 0.00, 1.00, 10.00, 450.00, 20130.06, kNon},
    {4000, 16, 0.1, 0.45, 0.45, 1.00, 10.00, 437.94, 3867.46, kNon},
    {4000, 16, 0.2, 0.00, 0.89, 1.00, 10.00, 450.00, 3835.91, kNon},
    {4000, 16, 1.0, 0.00, 0.89, 1.00, 10.00, 450.00, 3835.89, kNon},
    {4000, 48, 0.1, 0.20, 0.15, 1.00, 10.00, 442.87, 19257.85, kNon},
    {4000, 48, 0.2, 0.00, 0.33, 1.00, 10.00, 450.00, 19230.10, kNon},
    {4000, 48, 1.0, 0.00, 0.33, 1.00, 10.00, 450.00, 19230.08, kNon},
};

const std::vector<Printed> kTable6 = {
    {3000, 16, 0.1, 0.34, 0.23, 1.00, 10.00, 440.16, 4455.13, kNon},
    {3000, 16, 0.2, 0.00, 0.56, 1.00, 10.00, 451.09, 4429.85, kNon},
    {3000, 16, 1.0, 0.00, 0.56, 1.00, 10.00, 451.09, 4429.84, kNon},
    {3000, 48, 0.1, 0.01, 0.00, 1.00, 10.00, 450.52, 20180.12, kNon},
    {3000, 48, 0.2, 0.00, 0.00, 1.00, 10.00, 451.09, 20180.14, kNon},
    {3000, 48, 1.0, 0.00, 0.00, 1.00, 10.00, 451.09, 20180.19, kNon},
    {4000, 16, 0.1, 0.46, 0.45, 1.00, 10.00, 438.84, 3880.43, kNon},
    {4000, 16, 0.2, 0.00, 0.88, 1.00, 10.00, 451.09, 3849.26, kNon},
    {4000, 16, 1.0, 0.00, 0.88, 1.00, 10.00, 451.09, 3849.24, kNon},
    {4000, 48, 0.1, 0.19, 0.15, 1.00, 10.00, 444.14, 19306.37, kNon},
    {4000, 48, 0.2, 0.00, 0.33, 1.00, 10.00, 451.09, 19279.51, kNon},
    {4000, 48, 1.0, 0.00, 0.33, 1.00, 10.00, 451.09, 19279.46, kNon},
};

// (M, tau, ...); no decision column.
const std::vector<Printed> kTable9 = {
    {30, 1.0, 0, 1.44, 0.00, 1.00, 24.04, 42.20, 97.72, std::nullopt},
    {30, 1.5, 0, 1.10, 0.00, 1.50, 26.63, 40.76, 148.11, std::nullopt},
    {30, 2.0, 0, 0.81, 0.00, 2.00, 30.12, 38.82, 183.34, std::nullopt},
    {30, 5.0, 0, 0.08, 0.00, 5.00, 68.03, 17.76, 237.16, std::nullopt},
    {30, 6.0, 0, 0.47, 0.00, 6.00, 91.10, 4.95, 244.63, std::nullopt},
    {kLifetimeMembership, 1.0, 0, 1.35, 0.00, 1.00, 10.00, 50.00, 61.92, std::nullopt},
    {kLifetimeMembership, 1.5, 0, 0.98, 0.00, 1.50, 10.00, 50.00, 110.05, std::nullopt},
    {kLifetimeMembership, 2.0, 0, 0.65, 0.00, 2.00, 10.00, 50.00, 141.70, std::nullopt},
    {kLifetimeMembership, 5.0, 0, 0.92, 0.00, 5.00, 100.00, 0.00, 216.78, std::nullopt},
    {kLifetimeMembership, 6.0, 0, 0.78, 0.00, 6.00, 100.00, 0.00, 243.53, std::nullopt},
};

const std::vector<double> kTable7Lambda = {450.00, 335.41, 388.50, 360.98, 374.49, 367.67,
                                           371.07, 369.37, 370.22, 369.79, 370.00};
const std::vector<double> kTable7T3 = {1.49, 1.73, 1.60, 1.66, 1.63, 1.65,
                                       1.64, 1.65, 1.64, 1.64, 1.64};

bool close_to(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

void require_in(const std::vector<double>& grid, double value, const char* name) {
    for (double g : grid)
        if (close_to(g, value)) return;
    std::ostringstream msg;
    msg << "experiment grid '" << name << "' lacks the value " << value;
    throw ConfigMismatch(msg.str());
}

void require_equal(double have, double want, const char* name) {
    if (!close_to(have, want)) {
        std::ostringstream msg;
        msg << "experiment setting '" << name << "' is " << have << " but the table needs " << want;
        throw ConfigMismatch(msg.str());
    }
}

// Every study table shares h = 4, lambda_r = 50, F in [10, 100] and the
// family coefficients (100, 1) linear / (20, 101) logarithmic.
MarketParams table_market(const ExperimentConfig& config, double r, double K, double tau,
                          double M) {
    require_equal(config.base.h, 4.0, "h");
    require_equal(config.base.lambda_r, 50.0, "lambda_r");
    require_equal(config.base.f_min, 10.0, "f_min");
    require_equal(config.base.f_max, 100.0, "f_max");
    require_in(config.r, r, "r");
    require_in(config.K, K, "K");
    require_in(config.tau, tau, "tau");
    require_in(config.M, M, "M");
    MarketParams p = config.base;
    p.r = r;
    p.K = K;
    p.tau = tau;
    p.M = M;
    return p;
}

FeeModel table_fee_model(const ExperimentConfig& config, FeeFamily family, double delta) {
    if (std::find(config.fee_families.begin(), config.fee_families.end(), family) ==
        config.fee_families.end()) {
        throw ConfigMismatch("experiment fee_families lacks '" + std::string(to_string(family)) + "'");
    }
    require_in(config.delta, delta, "delta");
    if (family == FeeFamily::Linear) {
        require_equal(config.linear.a, 100.0, "linear.a");
        require_equal(config.linear.b, 1.0, "linear.b");
    } else {
        require_equal(config.logarithmic.a, 20.0, "logarithmic.a");
        require_equal(config.logarithmic.b, 101.0, "logarithmic.b");
    }
    return config.fee_model(family, delta);
}

CustomerResponse table_response(const ExperimentConfig& config, double c2) {
    require_in(config.c2, c2, "c2");
    return CustomerResponse{c2};
}

ExpectedRow expected_of(const Printed& p) {
    return {p.t1, p.t2, p.t3, p.F, p.lambda_p, p.profit, p.decision};
}

template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    const auto count = static_cast<std::size_t>(std::max(1, workers));
    if (count == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(count, n); ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s = buf;
    if (s == "-0.00") s = "0.00";
    return s;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    if (!dir.empty()) std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

}  // namespace

// --- config -----------------------------------------------------------------

void ExperimentConfig::validate() const {
    const auto nonempty = [](const std::vector<double>& g, const char* name) {
        if (g.empty()) throw InvalidParams(std::string(name) + " grid must be non-empty");
    };
    nonempty(r, "r");
    nonempty(K, "K");
    nonempty(tau, "tau");
    nonempty(c2, "c2");
    nonempty(delta, "delta");
    nonempty(M, "M");
    if (fee_families.empty()) throw InvalidParams("fee_families must be non-empty");
    for (double v : c2)
        if (!(v >= 0)) throw InvalidParams("c2 values must be >= 0");
    for (double v : delta)
        if (!(v > 0)) throw InvalidParams("delta values must be > 0");
    for (double v : M)
        if (!(v > 0) || !std::isfinite(v)) throw InvalidParams("M values must be finite and > 0");
    for (double rv : r)
        for (double Kv : K)
            for (double tv : tau) {
                MarketParams p = base;
                p.r = rv;
                p.K = Kv;
                p.tau = tv;
                p.validate();
            }
    for (FeeFamily f : fee_families) fee_model(f, delta.front()).validate(base.f_min, base.f_max);
    if (threads < 0) throw InvalidParams("threads must be >= 0");
    search.validate();
    if (recovery.max_iters < 1) throw InvalidParams("recovery max_iters must be >= 1");
}

FeeModel ExperimentConfig::fee_model(FeeFamily family, double d) const {
    FeeModel fm = family == FeeFamily::Linear ? linear : logarithmic;
    fm.family = family;
    fm.delta = d;
    return fm;
}

int worker_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("WOMOPS_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

// --- tables -----------------------------------------------------------------

std::string_view to_string(TableId id) {
    switch (id) {
        case TableId::T3: return "T3";
        case TableId::T4: return "T4";
        case TableId::T5: return "T5";
        case TableId::T6: return "T6";
        case TableId::T7: return "T7";
        case TableId::T8: return "T8";
        case TableId::T9: return "T9";
    }
    return "?";
}

TableId table_id_from_string(std::string_view name) {
    for (TableId id : {TableId::T3, TableId::T4, TableId::T5, TableId::T6, TableId::T7,
                       TableId::T8, TableId::T9}) {
        if (to_string(id) == name) return id;
    }
    throw ConfigMismatch("unknown table '" + std::string(name) + "'");
}

bool is_trace_table(TableId id) { return id == TableId::T7 || id == TableId::T8; }

TableSpec table_spec(TableId id, const ExperimentConfig& config) {
    TableSpec spec;
    spec.id = id;
    switch (id) {
        case TableId::T3:
        case TableId::T4: {
            const bool log = id == TableId::T4;
            spec.title = log ? "MDT signal, logarithmic N(F)" : "MDT signal, linear N(F)";
            const FeeModel fm =
                table_fee_model(config, log ? FeeFamily::Logarithmic : FeeFamily::Linear, 5.0);
            for (const Printed& p : log ? kTable4 : kTable3) {
                M2Problem pb{table_market(config, 8, log ? 1000 : 2000, p.key2, 30), fm,
                             table_response(config, p.key1), SignalSpec::mdt()};
                spec.rows.push_back({pb, expected_of(p)});
            }
            break;
        }
        case TableId::T5:
        case TableId::T6: {
            const bool log = id == TableId::T6;
            spec.title = log ? "NPS signal, logarithmic N(F)" : "NPS signal, linear N(F)";
            const FeeModel fm =
                table_fee_model(config, log ? FeeFamily::Logarithmic : FeeFamily::Linear, 5.0);
            for (const Printed& p : log ? kTable6 : kTable5) {
                M2Problem pb{table_market(config, p.key2, p.key1, 1.0, 30), fm,
                             table_response(config, p.key3), SignalSpec::nps()};
                spec.rows.push_back({pb, expected_of(p)});
            }
            break;
        }
        case TableId::T9: {
            spec.title = "MDT signal, linear N(F), monthly and lifetime membership";
            spec.tolerance.relative = 0.05;
            const FeeModel fm = table_fee_model(config, FeeFamily::Linear, 5.0 / 9.0);
            for (const Printed& p : kTable9) {
                M2Problem pb{table_market(config, 8, 1000, p.key2, p.key1), fm,
                             table_response(config, 1.0), SignalSpec::mdt()};
                spec.rows.push_back({pb, expected_of(p)});
            }
            break;
        }
        case TableId::T7:
        case TableId::T8:
            throw ConfigMismatch(std::string(to_string(id)) + " is a trace table; use run_trace");
    }
    return spec;
}

std::vector<ResultRow> solve_rows(const std::vector<M2Problem>& problems,
                                  const ExperimentConfig& config) {
    std::vector<ResultRow> rows(problems.size());
    parallel_for(problems.size(), worker_count(config.threads), [&](std::size_t i) {
        const M2Problem& pb = problems[i];
        const M2Solution sol = solve_m2(pb, config.search);
        const RecoveryReport rep = recoverability(pb, sol, config.recovery);
        ResultRow& row = rows[i];
        row.tau = pb.params.tau;
        row.c2 = pb.response.c2;
        row.K = pb.params.K;
        row.r = pb.params.r;
        row.M = pb.params.M;
        row.signal = pb.signal.kind;
        row.fee_family = pb.fee_model.family;
        row.delta = pb.fee_model.delta;
        row.t1 = sol.policy.t1;
        row.t2 = sol.policy.t2;
        row.t3 = sol.policy.t3;
        row.F = sol.fee;
        row.lambda_p = sol.lambda_p_eq;
        row.profit = sol.profit;
        row.no_wom_decision = rep.label;
        row.branch = sol.branch;
    });
    return rows;
}

std::vector<ResultRow> run_table(const ExperimentConfig& config, TableId id) {
    const TableSpec spec = table_spec(id, config);
    std::vector<M2Problem> problems;
    for (const auto& row : spec.rows) problems.push_back(row.problem);
    return solve_rows(problems, config);
}

std::vector<M2Problem> sweep_points(const ExperimentConfig& config) {
    config.validate();
    std::vector<M2Problem> out;
    for (FeeFamily family : config.fee_families)
        for (double d : config.delta)
            for (double M : config.M)
                for (double r : config.r)
                    for (double K : config.K)
                        for (double tau : config.tau)
                            for (double c2 : config.c2) {
                                MarketParams p = config.base;
                                p.r = r;
                                p.K = K;
                                p.tau = tau;
                                p.M = M;
                                out.push_back({p, config.fee_model(family, d), {c2},
                                               SignalSpec{config.signal, {}}});
                            }
    return out;
}

std::vector<ResultRow> run_sweep(const ExperimentConfig& config) {
    return solve_rows(sweep_points(config), config);
}

bool RowCheck::ok() const {
    for (const auto& c : cells)
        if (!c.ok) return false;
    return !expected_decision || *expected_decision == actual_decision;
}

std::vector<RowCheck> compare(const TableSpec& spec, const std::vector<ResultRow>& rows) {
    if (rows.size() != spec.rows.size()) {
        throw ConfigMismatch("result count does not match the table");
    }
    const Tolerance& tol = spec.tolerance;
    std::vector<RowCheck> out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const ExpectedRow& e = spec.rows[i].expected;
        const ResultRow& r = rows[i];
        RowCheck check;
        const auto cell = [&](const char* name, double want, double have, double abs_tol) {
            const double allowed = std::max(abs_tol, tol.relative * std::abs(want));
            check.cells.push_back({name, want, have, std::abs(have - want) <= allowed + 1e-12});
        };
        cell("t1", e.t1, r.t1, tol.time);
        cell("t2", e.t2, r.t2, tol.time);
        cell("t3", e.t3, r.t3, tol.time);
        cell("F", e.F, r.F, tol.fee);
        cell("lambda_p", e.lambda_p, r.lambda_p, tol.lambda_p);
        cell("profit", e.profit, r.profit, tol.profit);
        check.expected_decision = e.decision;
        check.actual_decision = r.no_wom_decision;
        out.push_back(std::move(check));
    }
    return out;
}

// --- traces -----------------------------------------------------------------

TraceSpec trace_spec(TableId id, const ExperimentConfig& config) {
    if (!is_trace_table(id)) {
        throw ConfigMismatch(std::string(to_string(id)) + " is not a trace table");
    }
    TraceSpec spec;
    spec.id = id;
    const double c2 = id == TableId::T7 ? 1.0 : 3.0;
    spec.system = FeedbackSystem{table_market(config, 8, 2000, 2.0, 30),
                                 table_fee_model(config, FeeFamily::Linear, 5.0),
                                 table_response(config, c2), SignalSpec::mdt(), 10.0};
    spec.iterations = 10;
    if (id == TableId::T7) {
        spec.expected_lambda_p = kTable7Lambda;
        spec.expected_t1.assign(kTable7Lambda.size(), 0.0);
        spec.expected_t3 = kTable7T3;
    } else {
        for (int k = 0; k <= spec.iterations; ++k) {
            const bool high = k % 2 == 0;
            spec.expected_lambda_p.push_back(high ? 450.00 : 186.34);
            spec.expected_t1.push_back(high ? 0.00 : 0.25);
            spec.expected_t3.push_back(high ? 1.49 : 2.00);
        }
    }
    return spec;
}

DynamicsTrace run_trace(const ExperimentConfig& config, TableId id) {
    const TraceSpec spec = trace_spec(id, config);
    return simulate(spec.system, spec.system.potential(), {spec.iterations, 1e-4, false});
}

TraceCheck compare(const TraceSpec& spec, const DynamicsTrace& trace) {
    TraceCheck check;
    check.entries = static_cast<int>(spec.expected_lambda_p.size());
    for (std::size_t k = 0; k < spec.expected_lambda_p.size() && k < trace.iterations.size(); ++k) {
        const IterationRecord& row = trace.iterations[k];
        if (std::abs(row.lambda_p - spec.expected_lambda_p[k]) <= spec.lambda_tol) ++check.lambda_matched;
        if (std::abs(row.policy.t1 - spec.expected_t1[k]) <= spec.t_tol &&
            std::abs(row.policy.t3 - spec.expected_t3[k]) <= spec.t_tol)
            ++check.t_matched;
    }
    return check;
}

// --- comparison -------------------------------------------------------------

ComparisonReport cyclic_vs_stationary(const M2Problem& problem, const ExperimentConfig& config) {
    ComparisonReport rep;
    rep.stationary = solve_m2(problem, config.search);
    rep.recovery = recoverability(problem, rep.stationary, config.recovery);
    rep.cycle_detected = rep.recovery.label == RecoveryClass::Cycles;
    rep.long_run_profit = rep.recovery.long_run_profit;
    rep.margin = rep.long_run_profit - rep.stationary.profit;
    rep.relative_margin = rep.stationary.profit != 0.0
                              ? rep.margin / std::abs(rep.stationary.profit)
                              : std::numeric_limits<double>::quiet_NaN();
    return rep;
}

// --- persistence ------------------------------------------------------------

std::string results_csv(const std::vector<ResultRow>& rows) {
    std::string out = "tau,c2,K,r,M,signal,fee_family,t1,t2,t3,F,lambda_p,profit,no_wom_decision\n";
    for (const ResultRow& r : rows) {
        out += fixed2(r.tau) + "," + fixed2(r.c2) + "," + fixed2(r.K) + "," + fixed2(r.r) + "," +
               fixed2(r.M) + "," + std::string(to_string(r.signal)) + "," +
               std::string(to_string(r.fee_family)) + "," + fixed2(r.t1) + "," + fixed2(r.t2) +
               "," + fixed2(r.t3) + "," + fixed2(r.F) + "," + fixed2(r.lambda_p) + "," +
               fixed2(r.profit) + "," + std::string(to_string(r.no_wom_decision)) + "\n";
    }
    return out;
}

std::string trace_csv(const DynamicsTrace& trace) {
    std::string out = "iter,lambda_p,t1,t2,t3,profit\n";
    for (const IterationRecord& row : trace.iterations) {
        out += std::to_string(row.k) + "," + fixed2(row.lambda_p) + "," + fixed2(row.policy.t1) +
               "," + fixed2(row.policy.t2) + "," + fixed2(row.policy.t3) + "," +
               fixed2(row.profit) + "\n";
    }
    return out;
}

void persist(const std::vector<ResultRow>& rows, const ExperimentConfig& config,
             const std::filesystem::path& dir, const std::string& stem) {
    ensure_dir(dir);
    nlohmann::json manifest{{"schema", kConfigSchema},
                            {"tool", "womops"},
                            {"version", std::string(kToolVersion)},
                            {"stem", stem},
                            {"config", to_json(config)},
                            {"rows", nlohmann::json::array()}};
    for (const ResultRow& r : rows) manifest["rows"].push_back(to_json(r));
    write_file(dir / (stem + ".csv"), results_csv(rows));
    write_file(dir / (stem + ".manifest.json"), manifest.dump(2) + "\n");
}

std::vector<ResultRow> load_results(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError("malformed manifest " + path.string() + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("rows") || !doc["rows"].is_array()) {
        throw IoError("manifest " + path.string() + " has no rows array");
    }
    std::vector<ResultRow> rows;
    for (std::size_t i = 0; i < doc["rows"].size(); ++i) {
        rows.push_back(parse_result_row(doc["rows"][i], "rows[" + std::to_string(i) + "]"));
    }
    return rows;
}

void write_trace_csv(const DynamicsTrace& trace, const std::filesystem::path& path) {
    ensure_dir(path.parent_path());
    write_file(path, trace_csv(trace));
}

}  // namespace womops
