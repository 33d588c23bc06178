#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "womops/domain.hpp"
#include "womops/dynamics.hpp"
#include "womops/m2_solver.hpp"

namespace womops {

/// Stand-in for an unbounded membership horizon. Fee revenue F lambda_p /
/// (delta M) becomes negligible at this size.
inline constexpr double kLifetimeMembership = 1e6;

/// Parameter grids and run settings for the computational study.
struct ExperimentConfig {
    std::vector<double> r{8, 16, 48};
    std::vector<double> K{1000, 2000, 3000, 4000};
    std::vector<double> tau{1, 1.5, 2, 3, 4, 5, 6, 7};
    std::vector<double> c2{0.1, 0.2, 0.5, 1, 2, 3};
    std::vector<double> delta{0.56, 5.0 / 9.0, 5};
    std::vector<double> M{30, kLifetimeMembership};
    std::vector<FeeFamily> fee_families{FeeFamily::Linear, FeeFamily::Logarithmic};
    /// (a, b) per family; delta comes from the `delta` grid.
    FeeModel linear{FeeFamily::Linear, 100, 1, 5};
    FeeModel logarithmic{FeeFamily::Logarithmic, 20, 101, 5};
    /// h, lambda_r and the fee bounds; the other fields are overridden per row.
    MarketParams base;
    SignalKind signal = SignalKind::MDT;
    SearchSpec search;
    RecoveryOptions recovery;
    std::string output_dir = "out";
    /// Recorded in the manifest. The solvers are deterministic, so it does
    /// not change results.
    std::uint64_t seed = 0;
    /// Worker count; 0 means WOMOPS_THREADS or the hardware concurrency.
    int threads = 0;

    /// Throws InvalidParams on an empty grid or invalid member.
    void validate() const;

    FeeModel fee_model(FeeFamily family, double delta) const;
};

/// One solved parameter point, one row of a result table.
struct ResultRow {
    double tau = 0, c2 = 0, K = 0, r = 0, M = 0;
    SignalKind signal = SignalKind::MDT;
    FeeFamily fee_family = FeeFamily::Linear;
    double delta = 0;
    double t1 = 0, t2 = 0, t3 = 0, F = 0, lambda_p = 0, profit = 0;
    RecoveryClass no_wom_decision = RecoveryClass::Undetermined;
    M2Branch branch = M2Branch::NumericInterior;

    friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

enum class TableId { T3, T4, T5, T6, T7, T8, T9 };

std::string_view to_string(TableId id);
/// Throws ConfigMismatch for an unknown id.
TableId table_id_from_string(std::string_view name);
bool is_trace_table(TableId id);

/// Published value for one table cell block. Decisions are absent for the
/// table that prints none.
struct ExpectedRow {
    double t1 = 0, t2 = 0, t3 = 0, F = 0, lambda_p = 0, profit = 0;
    std::optional<RecoveryClass> decision;
};

/// Absolute tolerances, or a relative band (with `time` as the absolute floor)
/// when `relative > 0`.
struct Tolerance {
    double time = 0.02;
    double fee = 0.5;
    double lambda_p = 0.5;
    double profit = 1.0;
    double relative = 0.0;
};

struct TableRowSpec {
    M2Problem problem;
    ExpectedRow expected;
};

struct TableSpec {
    TableId id = TableId::T3;
    std::string title;
    std::vector<TableRowSpec> rows;
    Tolerance tolerance;
};

/// Parameter points and reference values of a result table (T3 to T6, T9).
/// Throws ConfigMismatch for a trace table or when the config grids miss a
/// required value.
TableSpec table_spec(TableId id, const ExperimentConfig& config);

/// Solves every row with solve_m2 and labels it with recoverability. Rows run
/// on the worker pool; output order follows the table.
std::vector<ResultRow> run_table(const ExperimentConfig& config, TableId id);

/// Solves and labels arbitrary problems on the worker pool.
std::vector<ResultRow> solve_rows(const std::vector<M2Problem>& problems,
                                  const ExperimentConfig& config);

/// Every grid combination of (r, K, tau, c2, delta, fee family, M) under the
/// configured signal.
std::vector<M2Problem> sweep_points(const ExperimentConfig& config);
std::vector<ResultRow> run_sweep(const ExperimentConfig& config);

struct CellCheck {
    std::string column;
    double expected = 0;
    double actual = 0;
    bool ok = false;
};

struct RowCheck {
    std::vector<CellCheck> cells;
    std::optional<RecoveryClass> expected_decision;
    RecoveryClass actual_decision = RecoveryClass::Undetermined;
    bool ok() const;
};

std::vector<RowCheck> compare(const TableSpec& spec, const std::vector<ResultRow>& rows);

/// The myopic-trace setups (fixed fee, seed at c1(F)).
struct TraceSpec {
    TableId id = TableId::T7;
    FeedbackSystem system;
    int iterations = 10;
    std::vector<double> expected_lambda_p;
    std::vector<double> expected_t1;
    std::vector<double> expected_t3;
    double lambda_tol = 0.02;
    double t_tol = 0.01;
};

TraceSpec trace_spec(TableId id, const ExperimentConfig& config);

/// Runs the trace without early stopping so that exactly `iterations` steps
/// are produced; the tail is classified afterwards.
DynamicsTrace run_trace(const ExperimentConfig& config, TableId id);

struct TraceCheck {
    int lambda_matched = 0;
    int t_matched = 0;
    int entries = 0;
    bool ok() const { return lambda_matched == entries && t_matched == entries; }
};

TraceCheck compare(const TraceSpec& spec, const DynamicsTrace& trace);

/// Stationary optimum against the long-run outcome of the myopic loop at the
/// same fee.
struct ComparisonReport {
    M2Solution stationary;
    RecoveryReport recovery;
    bool cycle_detected = false;
    /// Time-weighted cycle average, or the limit profit when no cycle forms.
    double long_run_profit = 0;
    /// long_run_profit - stationary profit.
    double margin = 0;
    double relative_margin = 0;
    bool cyclic_wins() const { return cycle_detected && margin > 0; }
};

ComparisonReport cyclic_vs_stationary(const M2Problem& problem, const ExperimentConfig& config);

/// Writes `<stem>.csv` (2-decimal table) and `<stem>.manifest.json` (config,
/// version, full-precision rows with solver branch) into `dir`. Throws
/// IoError.
void persist(const std::vector<ResultRow>& rows, const ExperimentConfig& config,
             const std::filesystem::path& dir, const std::string& stem);

/// Reads the rows back from a manifest written by `persist`.
std::vector<ResultRow> load_results(const std::filesystem::path& manifest);

/// Trace CSV `iter,lambda_p,t1,t2,t3,profit`.
void write_trace_csv(const DynamicsTrace& trace, const std::filesystem::path& path);

std::string results_csv(const std::vector<ResultRow>& rows);
std::string trace_csv(const DynamicsTrace& trace);

/// Worker count from WOMOPS_THREADS, else the hardware concurrency.
int worker_count(int requested = 0);

inline constexpr std::string_view kToolVersion = "1.0.0";

}  // namespace womops
