#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "womops/domain.hpp"
#include "womops/dynamics.hpp"

namespace womops {

/// Joint shipment-policy and fee problem under a stationary demand
/// equilibrium lambda_p = R(theta(policy)).
struct M2Problem {
    MarketParams params;
    FeeModel fee_model;
    CustomerResponse response;
    SignalSpec signal = SignalSpec::mdt();

    /// Validates all parts; throws InvalidParams.
    void validate() const;

    /// True for the MDT / linear N(F) / c2 = 1 setting in which the t3 < tau
    /// regime has closed forms.
    bool has_closed_forms() const;

    /// Equilibrium demand R(theta(policy)) at fee F.
    double equilibrium_demand(const ShipmentPolicy& policy, double fee) const;

    /// Profit rate with the equilibrium demand substituted in.
    double objective(const ShipmentPolicy& policy, double fee) const;

    /// Upper bound used for t1 and t2 in the search box:
    /// max(3 tau, 3 sqrt(2K / (h lambda_r)), 2r/h + 2 f_max / (h delta M)).
    double time_cap() const;
};

enum class M2Branch { NumericInterior, NumericBoundary, ClosedFormInteriorFee, ClosedFormBoundaryFee };

std::string_view to_string(M2Branch branch);

struct M2Solution {
    ShipmentPolicy policy;
    double fee = 0.0;
    double lambda_p_eq = 0.0;
    double profit = 0.0;
    M2Branch branch = M2Branch::NumericInterior;
};

/// Multi-start search settings. Defaults are the ones every table in the
/// experiment harness is reproduced with.
struct SearchSpec {
    int time_points = 40;   ///< coarse grid points per phase dimension
    int fee_points = 30;
    int top_n = 8;          ///< distinct coarse-grid seeds that get polished
    double tolerance = 1e-8;
    int max_iterations = 4000;  ///< per simplex run

    void validate() const;
};

/// Coarse grid over (t1, t2, t3, F) in [0, cap]^2 x [0, tau] x [f_min, f_max],
/// followed by a bounded simplex polish and a compass-search finish from the
/// best `top_n` well-separated grid points. Deterministic.
M2Solution solve_m2(const M2Problem& problem, const SearchSpec& search = {});

/// Which fee first-order condition the closed form uses.
struct FeeRegime {
    enum class Kind { Interior, Boundary };
    Kind kind = Kind::Interior;
    double fee = 0.0;  ///< Boundary only

    static FeeRegime interior() { return {Kind::Interior, 0.0}; }
    static FeeRegime boundary(double f) { return {Kind::Boundary, f}; }
};

struct ClosedFormPoint {
    double t3 = 0.0;
    double fee = 0.0;
};

/// Optimal t3 (with T = t3, t1 = t2 = 0) in the regime t3 < tau.
///
/// Boundary fee: real root of  n delta M h t^3 - n (delta M r + F) t^2 - K tau M = 0,
/// n = a - bF, by Cardano's formula.
/// Interior fee: with F*(t) = (a - b delta M (r - h t / 2)) / (2b), the smaller
/// root in (P/3Q, P/Q) of  (P - Q t)(P - 3Q t) t^2 + 4 b M tau K = 0,
/// P = a + b delta M r, Q = b delta M h / 2, by Ferrari's method.
///
/// Throws UnsupportedSignal outside MDT / linear / c2 = 1 and RegimeViolation
/// when the regime does not apply (no real root, t3 >= tau, or F* outside
/// (f_min, f_max)).
ClosedFormPoint closed_form_t3(const M2Problem& problem, const FeeRegime& regime);

/// Structural properties of an M2 solution.
struct StructureReport {
    bool phase2_needs_phase1 = true;  ///< t1 = 0 implies t2 = 0
    bool slack_needs_no_phase1 = true;  ///< t3 < tau implies t1 = 0
    bool t1_within_bound = true;      ///< t1 <= r / h
    bool structure_enforced = true;   ///< false for NPS: (a)/(b) are findings only
    std::vector<std::string> findings;

    /// True when every enforced property holds.
    bool consistent() const {
        return t1_within_bound &&
               (!structure_enforced || (phase2_needs_phase1 && slack_needs_no_phase1));
    }
};

StructureReport check_lemma2(const M2Problem& problem, const M2Solution& solution,
                             double tol = 1e-6);

enum class RecoveryClass { OptEq, NonOptEq, Cycles, Undetermined };

std::string_view to_string(RecoveryClass c);

struct DemandLimitCheck {
    bool equality_expected = false;  ///< c1(F) <= 2K / (h tau^2)
    double lambda_bar_predicted = 0.0;
    bool holds = false;
};

struct RecoveryOptions {
    int max_iters = 5000;
    double sim_tol = 1e-7;
    /// Relative tolerance for matching the long-run state to the optimum.
    double match_tol = 1e-4;
};

struct RecoveryReport {
    RecoveryClass label = RecoveryClass::Undetermined;
    DynamicsTrace trace;
    double lambda_p_eq = 0.0;
    double m2_profit = 0.0;
    double long_run_lambda_p = 0.0;  ///< limit, or cycle mean for Cycles
    double long_run_profit = 0.0;    ///< limit profit, or time-weighted cycle average
    /// How much more the optimum earns relative to the long-run outcome:
    /// m2_profit / long_run_profit - 1.
    double shortfall = 0.0;
    std::optional<DemandLimitCheck> demand_limit;  ///< MDT with c2 = 1 only
};

/// Hands only the optimal fee to a myopic operator, seeds the feedback loop
/// at c1(F), and labels the long-run outcome.
RecoveryReport recoverability(const M2Problem& problem, const M2Solution& solution,
                              const RecoveryOptions& options = {});

/// Time-weighted average profit over the last detected 2-cycle of a trace:
/// sum(profit_k T_k) / sum(T_k).
double cycle_average_profit(const DynamicsTrace& trace);

FeedbackSystem feedback_system_for(const M2Problem& problem, double fee);

}  // namespace womops
