// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "womops/cli.hpp"
#include "womops/dynamics.hpp"
#include "womops/experiments.hpp"
#include "womops/m1_solver.hpp"
#include "womops/m2_solver.hpp"

using namespace womops;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

M2Problem table3(double tau, double c2) {
    M2Problem pb;
    pb.params.tau = tau;
    pb.response.c2 = c2;
    return pb;
}

FeedbackSystem fixed_fee(double c2) {
    FeedbackSystem sys;
    sys.response.c2 = c2;
    sys.fee = 10;
    return sys;
}

Outcome table_three() {
    const ExperimentConfig cfg;
    const auto t0 = std::chrono::steady_clock::now();
    const auto rows = run_table(cfg, TableId::T3);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto checks = compare(table_spec(TableId::T3, cfg), rows);
    int cells_ok = 0;
    int cells = 0;
    int rows_ok = 0;
    for (const RowCheck& rc : checks) {
        bool ok = true;
        for (const CellCheck& c : rc.cells) {
            ++cells;
            cells_ok += c.ok;
            ok = ok && c.ok;
        }
        rows_ok += ok;
    }
    const bool pass = rows_ok == static_cast<int>(checks.size()) && secs < 60.0;
    return {pass, fmt("Table 3 rows %d/%zu within tolerance (%d/%d cells), %.2f s", rows_ok,
                      checks.size(), cells_ok, cells, secs)};
}

Outcome regimes() {
    const FeedbackSystem conv = fixed_fee(1);
    const DynamicsTrace tr = simulate(conv, conv.potential(), {15, 1e-4, false});
    const double limit = 450 * std::cbrt(250.0 / 450.0);
    const double last = tr.iterations.back().lambda_p;
    const bool a = std::abs(limit - 370.00) <= 0.1 && std::abs(last - limit) <= 0.1;

    const FeedbackSystem cyc = fixed_fee(3);
    const DynamicsTrace ct = simulate(cyc, cyc.potential(), {100, 1e-4, true});
    const bool b = ct.classification.kind == LongRunKind::Cycle2 &&
                   std::abs(ct.classification.cycle_high - 450.00) <= 0.02 &&
                   std::abs(ct.classification.cycle_low - 186.34) <= 0.02;

    bool c = true;
    for (double c2 : {0.5, 1.0, 3.0}) {
        for (double fee : {55.0, 60.0, 90.0}) {  // c1 = 225, 200, 50 <= 250
            FeedbackSystem sys = fixed_fee(c2);
            sys.fee = fee;
            const DynamicsTrace t = simulate(sys, sys.potential(), {100, 1e-9, true});
            c = c && t.classification.kind == LongRunKind::ConvergedToPotential &&
                t.iterations.size() == 2;
        }
    }
    return {a && b && c,
            fmt("(a) lambda_15=%.4f limit=%.4f %s; (b) cycle %.2f/%.2f %s; (c) one-step potential %s",
                last, limit, a ? "ok" : "bad", ct.classification.cycle_high,
                ct.classification.cycle_low, b ? "ok" : "bad", c ? "ok" : "bad")};
}

Outcome table_seven() {
    const ExperimentConfig cfg;
    const TraceSpec spec = trace_spec(TableId::T7, cfg);
    const DynamicsTrace tr = run_trace(cfg, TableId::T7);
    int lam = 0;
    int t3 = 0;
    const std::size_t n = spec.expected_lambda_p.size();
    for (std::size_t k = 0; k < n && k < tr.iterations.size(); ++k) {
        lam += std::abs(tr.iterations[k].lambda_p - spec.expected_lambda_p[k]) <= 0.02;
        t3 += std::abs(tr.iterations[k].policy.t3 - spec.expected_t3[k]) <= 0.01;
    }
    const int total = static_cast<int>(n);
    return {lam == total && t3 == total && n == 11,
            fmt("lambda_p %d/%d, t3 %d/%d", lam, total, t3, total)};
}

bool lemma1_holds(const ShipmentPolicy& p, double tau) {
    if (p.t1 == 0 && p.t2 != 0) return false;
    if (p.t3 < tau && p.t1 != 0) return false;
    return true;
}

Outcome oracle_equivalence() {
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> u(0, 1);
    const auto log_uniform = [&](double lo, double hi) {
        return std::exp(std::log(lo) + u(rng) * (std::log(hi) - std::log(lo)));
    };
    int profit_ok = 0;
    int kkt_ok = 0;
    int structure_ok = 0;
    double worst_gap = -1;
    const int n = 200;
    for (int i = 0; i < n; ++i) {
        MarketParams p;
        p.r = log_uniform(8, 48);
        p.K = log_uniform(1000, 4000);
        p.tau = log_uniform(1, 7);
        const double lp = log_uniform(20, 500);
        const M1Solution s = solve_m1(p, lp);
        const M1Solution o = oracle_m1(p, lp, {0.005, 0});
        const double tol = 0.05 * std::max(1.0, std::abs(s.profit));
        profit_ok += s.profit >= o.profit - tol;
        worst_gap = std::max(worst_gap, (o.profit - s.profit) / std::max(1.0, std::abs(s.profit)));
        kkt_ok += kkt_residual(s.case_id, p, lp, s.policy) <= 1e-6;
        structure_ok += lemma1_holds(s.policy, p.tau);
    }
    return {profit_ok == n && kkt_ok == n && structure_ok == n,
            fmt("profit %d/%d (largest oracle excess %.2e of |profit|), KKT %d/%d, structure %d/%d", profit_ok, n,
                worst_gap, kkt_ok, n, structure_ok, n)};
}

Outcome propositions() {
    std::vector<double> taus;
    for (double t = 2.0; t <= 6.0 + 1e-9; t += 0.5) taus.push_back(t);
    double prev_t3 = -1;
    double prev_profit = 0;
    double prev_tau = 0;
    int pairs = 0;
    int p1 = 0;
    int p2 = 0;
    for (double tau : taus) {
        const M2Solution s = solve_m2(table3(tau, 1));
        if (s.policy.t3 >= tau - 1e-9) {
            prev_t3 = -1;
            continue;
        }
        if (prev_t3 >= 0 && tau - prev_tau < 0.5 + 1e-9) {
            ++pairs;
            p1 += s.policy.t3 >= prev_t3 - 1e-6;
            p2 += s.profit <= prev_profit + 1e-6;
        }
        prev_t3 = s.policy.t3;
        prev_profit = s.profit;
        prev_tau = tau;
    }

    const ExperimentConfig cfg;
    int points = 0;
    int p3 = 0;
    int equality = 0;
    for (FeeFamily family : {FeeFamily::Linear, FeeFamily::Logarithmic}) {
        for (double r : cfg.r) {
            for (double K : cfg.K) {
                for (double tau : cfg.tau) {
                    M2Problem pb;
                    pb.params.r = r;
                    pb.params.K = K;
                    pb.params.tau = tau;
                    pb.fee_model = cfg.fee_model(family, 5);
                    const M2Solution s = solve_m2(pb);
                    const RecoveryReport rep = recoverability(pb, s);
                    ++points;
                    if (rep.demand_limit && rep.demand_limit->holds) ++p3;
                    if (rep.demand_limit && rep.demand_limit->equality_expected) ++equality;
                }
            }
        }
    }
    return {pairs > 0 && p1 == pairs && p2 == pairs && p3 == points,
            fmt("t3 nondecreasing %d/%d, profit nonincreasing %d/%d over interior tau pairs; "
                "long-run pattern %d/%d sweep points (%d at the potential)",
                p1, pairs, p2, pairs, p3, points, equality)};
}

Outcome recovery_labels() {
    const ExperimentConfig cfg;
    const auto checks = compare(table_spec(TableId::T3, cfg), run_table(cfg, TableId::T3));
    int labels = 0;
    int listed = 0;
    for (const RowCheck& rc : checks) {
        if (!rc.expected_decision) continue;
        ++listed;
        labels += *rc.expected_decision == rc.actual_decision;
    }
    const M2Problem pb = table3(2, 1);
    const RecoveryReport rep = recoverability(pb, solve_m2(pb));
    const bool gap = std::abs(rep.shortfall - 0.29) <= 0.02;
    return {labels == 10 && listed == 10 && gap,
            fmt("labels %d/%d, shortfall at tau=2 c2=1 %.2f%%", labels, listed, 100 * rep.shortfall)};
}

Outcome nps_finding() {
    M2Problem pb = table3(1, 0.2);
    pb.params.K = 3000;
    pb.params.r = 16;
    pb.signal = SignalSpec::nps();
    const M2Solution a = solve_m2(pb);
    pb.response.c2 = 0.1;
    const M2Solution b = solve_m2(pb);
    const bool pass = a.policy.t1 == 0 && a.policy.t2 > 0 && std::abs(a.policy.t2 - 0.57) <= 0.05 &&
                      b.policy.t1 > 0;
    return {pass, fmt("c2=0.2: t1=%.4f t2=%.4f; c2=0.1: t1=%.4f", a.policy.t1, a.policy.t2,
                      b.policy.t1)};
}

Outcome cyclic_wins() {
    M2Problem pb = table3(5, 3);
    pb.params.K = 1000;
    pb.fee_model = {FeeFamily::Logarithmic, 20, 101, 5};
    const ComparisonReport rep = cyclic_vs_stationary(pb, {});
    const bool pass = rep.cyclic_wins() && rep.long_run_profit > 295.74;
    return {pass, fmt("stationary %.2f, cycle average %.2f, margin %+.2f (%+.1f%%)",
                      rep.stationary.profit, rep.long_run_profit, rep.margin,
                      100 * rep.relative_margin)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const fs::path base = fs::temp_directory_path() / "womops_acceptance";
    fs::remove_all(base);
    for (const char* sub : {"a", "b"}) {
        const std::string dir = (base / sub).string();
        const char* argv[] = {"womops", "reproduce", "--table", "T3", "--out", dir.c_str()};
        std::ostringstream out, err;
        if (cli::run(6, argv, out, err) != cli::kExitOk) return {false, "reproduce failed: " + err.str()};
    }
    bool same = true;
    for (const char* f : {"table_T3.csv", "table_T3.manifest.json"}) {
        const std::string x = slurp(base / "a" / f);
        same = same && !x.empty() && x == slurp(base / "b" / f);
    }
    fs::remove_all(base);
    return {same, same ? "CSV and manifest byte-identical across two runs" : "outputs differ"};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"Table 3 reproduction", table_three},
        {"long-run regimes", regimes},
        {"Table 7 trace", table_seven},
        {"M1 oracle equivalence", oracle_equivalence},
        {"tau monotonicity and long-run demand", propositions},
        {"recoverability labels", recovery_labels},
        {"NPS structure", nps_finding},
        {"cyclic beats stationary", cyclic_wins},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
