#include "womops/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "womops/errors.hpp"

namespace womops {

std::string_view to_string(LongRunKind kind) {
    switch (kind) {
        case LongRunKind::ConvergedToPotential: return "ConvergedToPotential";
        case LongRunKind::ConvergedInterior: return "ConvergedInterior";
        case LongRunKind::Cycle2: return "Cycle2";
        case LongRunKind::Undetermined: return "Undetermined";
    }
    return "?";
}

StepResult step(const FeedbackSystem& sys, double lambda_p) {
    const double c1 = sys.potential();
    if (lambda_p < 0 || lambda_p > c1 + 1e-9 * std::max(1.0, c1)) {
        throw InvalidParams("lambda_p must lie in [0, c1(F)]");
    }
    StepResult out;
    out.solution = solve_m1(sys.params, lambda_p);
    const double theta = signal(sys.signal, out.solution.policy, sys.params.tau);
    out.next_lambda_p = respond(sys.response, sys.fee_model, sys.fee, theta);
    return out;
}

namespace {

LongRunClass converged(double limit, double potential, double tol) {
    LongRunClass c;
    c.kind = std::abs(limit - potential) <= tol ? LongRunKind::ConvergedToPotential
                                                : LongRunKind::ConvergedInterior;
    c.limit = limit;
    c.tolerance = tol;
    return c;
}

LongRunClass cycle(double a, double b, double tol) {
    LongRunClass c;
    c.kind = LongRunKind::Cycle2;
    c.cycle_high = std::max(a, b);
    c.cycle_low = std::min(a, b);
    c.tolerance = tol;
    return c;
}

int settled_index(const std::vector<IterationRecord>& rows, const LongRunClass& c) {
    const auto matches = [&](const IterationRecord& row) {
        switch (c.kind) {
            case LongRunKind::ConvergedToPotential:
            case LongRunKind::ConvergedInterior:
                return std::abs(row.lambda_p - c.limit) <= c.tolerance;
            case LongRunKind::Cycle2:
                return std::abs(row.lambda_p - c.cycle_high) <= c.tolerance ||
                       std::abs(row.lambda_p - c.cycle_low) <= c.tolerance;
            case LongRunKind::Undetermined:
                return false;
        }
        return false;
    };
    int idx = -1;
    for (int i = static_cast<int>(rows.size()) - 1; i >= 0; --i) {
        if (!matches(rows[static_cast<std::size_t>(i)])) break;
        idx = i;
    }
    return idx;
}

constexpr double kCycleGap = 1e3;

}  // namespace

LongRunClass classify_tail(const std::vector<IterationRecord>& rows, double potential,
                           double tol) {
    const std::size_t n = rows.size();
    if (n >= 2 && std::abs(rows[n - 1].lambda_p - rows[n - 2].lambda_p) < tol) {
        return converged(rows[n - 1].lambda_p, potential, tol);
    }
    // A slowly damped oscillation also repeats every other step; the two
    // branches of a real cycle stay well apart.
    if (n >= 3 && std::abs(rows[n - 1].lambda_p - rows[n - 3].lambda_p) < tol &&
        std::abs(rows[n - 1].lambda_p - rows[n - 2].lambda_p) > kCycleGap * tol) {
        return cycle(rows[n - 1].lambda_p, rows[n - 2].lambda_p, tol);
    }
    LongRunClass c;
    c.tolerance = tol;
    return c;
}

DynamicsTrace simulate(const FeedbackSystem& sys, double seed_lambda_p,
                       const SimulateOptions& options) {
    if (options.max_iters < 0) throw InvalidParams("max_iters must be >= 0");
    if (!(options.tol > 0)) throw InvalidParams("tol must be > 0");

    const double c1 = sys.potential();
    DynamicsTrace trace;
    trace.iterations.reserve(static_cast<std::size_t>(options.max_iters) + 1);
    double lambda_p = seed_lambda_p;
    bool stopped = false;
    for (int k = 0;; ++k) {
        const StepResult st = step(sys, lambda_p);
        const M1Solution& sol = st.solution;
        trace.iterations.push_back(
            {k, lambda_p, sol.policy, sol.case_id,
             profit_m2(sys.params, sys.fee_model, sol.policy, sys.fee, lambda_p)});
        if (options.stop_early && k >= 1) {
            const LongRunClass c = classify_tail(trace.iterations, c1, options.tol);
            if (c.kind != LongRunKind::Undetermined) {
                trace.classification = c;
                stopped = true;
                break;
            }
        }
        if (k >= options.max_iters) break;
        lambda_p = st.next_lambda_p;
    }
    if (!stopped) {
        trace.classification = options.max_iters >= 1
                                   ? classify_tail(trace.iterations, c1, options.tol)
                                   : LongRunClass{LongRunKind::Undetermined, 0, 0, 0, options.tol};
    }
    trace.settled_at = settled_index(trace.iterations, trace.classification);
    if (sys.signal.kind == SignalKind::MDT) trace.prediction = theorem1_predict(sys);
    return trace;
}

LongRunClass theorem1_predict(const FeedbackSystem& sys) {
    if (sys.signal.kind != SignalKind::MDT) {
        throw UnsupportedSignal("long-run prediction requires the MDT signal");
    }
    const double c1 = sys.potential();
    const double threshold = sys.params.binding_threshold();
    const double c2 = sys.response.c2;
    LongRunClass out;
    out.tolerance = 0.0;
    if (c1 <= threshold || c2 == 0.0) {
        out.kind = LongRunKind::ConvergedToPotential;
        out.limit = c1;
        return out;
    }
    const double w = threshold / c1;
    if (c2 >= 2.0) {
        out.kind = LongRunKind::Cycle2;
        out.cycle_high = c1;
        out.cycle_low = c1 * std::pow(w, c2 / 2.0);
        return out;
    }
    out.kind = LongRunKind::ConvergedInterior;
    out.limit = c1 * std::pow(w, c2 / (c2 + 2.0));
    return out;
}

}  // namespace womops
