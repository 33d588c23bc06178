#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "womops/domain.hpp"
#include "womops/m1_solver.hpp"

namespace womops {

/// Everything the myopic feedback loop needs: the market, the fee model at a
/// fixed fee, and how customers react to the observed signal.
struct FeedbackSystem {
    MarketParams params;
    FeeModel fee_model;
    CustomerResponse response;
    SignalSpec signal = SignalSpec::mdt();
    double fee = 10.0;

    double potential() const { return potential_market(fee_model, fee); }
};

struct IterationRecord {
    int k = 0;
    double lambda_p = 0.0;
    ShipmentPolicy policy;
    M1Case case_id = M1Case::I;
    /// Profit rate earned in period k: the period-k policy served lambda_p^k,
    /// fee revenue included.
    double profit = 0.0;
};

enum class LongRunKind { ConvergedToPotential, ConvergedInterior, Cycle2, Undetermined };

std::string_view to_string(LongRunKind kind);

struct LongRunClass {
    LongRunKind kind = LongRunKind::Undetermined;
    double limit = 0.0;        ///< converged value (Converged*)
    double cycle_high = 0.0;   ///< Cycle2 only
    double cycle_low = 0.0;    ///< Cycle2 only
    double tolerance = 0.0;
};

struct DynamicsTrace {
    std::vector<IterationRecord> iterations;
    LongRunClass classification;
    /// Closed-form long-run prediction, attached for MDT systems.
    std::optional<LongRunClass> prediction;
    /// First index from which every later iterate matches the classified
    /// long-run behaviour within tolerance; -1 when Undetermined.
    int settled_at = -1;
};

struct StepResult {
    M1Solution solution;
    double next_lambda_p = 0.0;
};

/// One period of the loop: solve the myopic problem for lambda_p, emit the
/// signal, and let customers respond.
StepResult step(const FeedbackSystem& system, double lambda_p);

struct SimulateOptions {
    int max_iters = 100;
    double tol = 1e-4;
    /// When false the full max_iters iterations are produced and the tail of
    /// the trace is classified afterwards.
    bool stop_early = true;
};

/// Iterates `step` from `seed_lambda_p`. Row k of the trace holds lambda_p^k
/// and the policy solved for it, so max_iters steps give max_iters + 1 rows.
DynamicsTrace simulate(const FeedbackSystem& system, double seed_lambda_p,
                       const SimulateOptions& options = {});

/// Classifies the tail of an already computed trace.
LongRunClass classify_tail(const std::vector<IterationRecord>& rows, double potential,
                           double tol);

/// Long-run premium demand predicted for the MDT signal. Throws
/// UnsupportedSignal for any other signal.
LongRunClass theorem1_predict(const FeedbackSystem& system);

}  // namespace womops
