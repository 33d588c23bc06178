#include "womops/m1_solver.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "womops/errors.hpp"

namespace womops {
namespace {

// Gradient of the minimisation form
//   f = h lp T / 2 + h lr t1^2 / (2T) + K / T + lr r t2 / T
// which differs from the negated profit rate by a constant.
struct Gradient {
    double d1, d2, d3;
};

Gradient min_form_gradient(const MarketParams& p, double lambda_p, const ShipmentPolicy& s) {
    const double T = s.cycle_length();
    const double T2 = T * T;
    const double common = p.h * lambda_p / 2.0 - p.h * p.lambda_r * s.t1 * s.t1 / (2.0 * T2) -
                          p.K / T2 - p.lambda_r * p.r * s.t2 / T2;
    return {common + p.h * p.lambda_r * s.t1 / T, common + p.lambda_r * p.r / T, common};
}

M1Case infer_case(const ShipmentPolicy& s, double tau, double tol) {
    if (s.t1 <= tol) return s.t3 < tau - tol ? M1Case::II : M1Case::I;
    return s.t2 <= tol ? M1Case::III : M1Case::IV;
}

}  // namespace

std::string_view to_string(M1Case c) {
    switch (c) {
        case M1Case::I: return "I";
        case M1Case::II: return "II";
        case M1Case::III: return "III";
        case M1Case::IV: return "IV";
    }
    return "?";
}

std::optional<ShipmentPolicy> candidate(M1Case c, const MarketParams& p, double lambda_p) {
    if (lambda_p < 0) throw InvalidParams("lambda_p must be >= 0");
    if (lambda_p == 0 && (c == M1Case::II || c == M1Case::IV)) {
        throw InvalidParams("case " + std::string(to_string(c)) + " is undefined at lambda_p = 0");
    }
    const double tau = p.tau;
    switch (c) {
        case M1Case::I:
            return ShipmentPolicy{0.0, 0.0, tau};
        case M1Case::II: {
            const double t3 = std::sqrt(2.0 * p.K / (p.h * lambda_p));
            if (!(t3 < tau)) return std::nullopt;
            return ShipmentPolicy{0.0, 0.0, t3};
        }
        case M1Case::III: {
            const double t1 =
                std::sqrt((p.h * p.lambda_r * tau * tau + 2.0 * p.K) / (p.h * (lambda_p + p.lambda_r))) -
                tau;
            if (!(t1 > 0)) return std::nullopt;
            return ShipmentPolicy{t1, 0.0, tau};
        }
        case M1Case::IV: {
            const double radicand = (2.0 * p.h * p.K - 2.0 * p.h * p.lambda_r * p.r * tau -
                                     p.lambda_r * p.r * p.r) /
                                    (p.h * p.h * lambda_p);
            // A negative radicand means the case has no real stationary point.
            if (!(radicand > 0)) return std::nullopt;
            const double t1 = p.r / p.h;
            const double t2 = std::sqrt(radicand) - t1 - tau;
            if (!(t2 > 0)) return std::nullopt;
            return ShipmentPolicy{t1, t2, tau};
        }
    }
    return std::nullopt;
}

M1Solution solve_m1(const MarketParams& p, double lambda_p) {
    if (lambda_p < 0) throw InvalidParams("lambda_p must be >= 0");
    if (lambda_p == 0 && p.lambda_r == 0) {
        throw InvalidParams("lambda_p and lambda_r cannot both be zero");
    }
    std::optional<M1Solution> best;
    for (M1Case c : kAllM1Cases) {
        if (lambda_p == 0 && (c == M1Case::II || c == M1Case::IV)) continue;
        const auto policy = candidate(c, p, lambda_p);
        if (!policy) continue;
        const double profit = profit_m1(p, *policy, lambda_p);
        // Strict comparison keeps the lowest case id on ties.
        if (!best || profit > best->profit) best = M1Solution{*policy, c, profit, lambda_p};
    }
    assert(best && "case I is always feasible");
    return *best;
}

double kkt_residual(M1Case c, const MarketParams& p, double lambda_p, const ShipmentPolicy& s) {
    const Gradient g = min_form_gradient(p, lambda_p, s);
    switch (c) {
        case M1Case::I: return 0.0;
        case M1Case::II: return std::abs(g.d3);
        case M1Case::III: return std::abs(g.d1);
        case M1Case::IV: return std::max(std::abs(g.d1), std::abs(g.d2));
    }
    return std::numeric_limits<double>::infinity();
}

M1Solution oracle_m1(const MarketParams& p, double lambda_p, const GridSpec& grid) {
    if (!(grid.step > 0) || !std::isfinite(grid.step)) throw InvalidGrid("grid step must be > 0");
    double t_max = grid.t_max;
    if (t_max <= 0) {
        t_max = std::max(2.0 * p.tau,
                         2.0 * std::sqrt(2.0 * p.K / (p.h * std::max(lambda_p, 1.0)))) +
                2.0 * p.r / p.h;
    }
    if (t_max < p.tau) throw InvalidGrid("grid t_max must cover tau");
    const auto n = static_cast<long>(std::floor(t_max / grid.step + 1e-9));
    if (n < 1) throw InvalidGrid("grid has no interior points");

    M1Solution best;
    best.profit = -std::numeric_limits<double>::infinity();
    best.lambda_p_in = lambda_p;
    for (long j = 1; j <= n; ++j) {
        const double T = static_cast<double>(j) * grid.step;
        for (long i = 0; i < j; ++i) {
            const double t1 = static_cast<double>(i) * grid.step;
            const double t3 = std::min(p.tau, T - t1);
            const ShipmentPolicy s{t1, std::max(0.0, T - t1 - t3), t3};
            const double v = profit_m1(p, s, lambda_p);
            if (v > best.profit) {
                best.profit = v;
                best.policy = s;
            }
        }
    }
    best.case_id = infer_case(best.policy, p.tau, grid.step / 2.0);
    return best;
}

}  // namespace womops
