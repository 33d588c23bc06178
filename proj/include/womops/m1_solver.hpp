#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "womops/domain.hpp"

namespace womops {

/// Undominated KKT cases of the myopic shipment problem.
///   I:   t1 = t2 = 0, t3 = tau
///   II:  t1 = t2 = 0, t3 < tau
///   III: t1 > 0, t2 = 0, t3 = tau
///   IV:  t1 > 0, t2 > 0, t3 = tau
enum class M1Case { I, II, III, IV };

inline constexpr std::array<M1Case, 4> kAllM1Cases{M1Case::I, M1Case::II, M1Case::III,
                                                   M1Case::IV};

std::string_view to_string(M1Case c);

struct M1Solution {
    ShipmentPolicy policy;
    M1Case case_id = M1Case::I;
    double profit = 0.0;
    double lambda_p_in = 0.0;  ///< demand the solve was conditioned on
};

/// Closed-form stationary point for one case, or nullopt when the case's
/// feasibility condition fails. Throws InvalidParams for case II or IV at
/// lambda_p = 0.
std::optional<ShipmentPolicy> candidate(M1Case c, const MarketParams& params, double lambda_p);

/// Best feasible candidate; ties go to the lowest case id. At lambda_p = 0
/// only cases I and III are considered.
M1Solution solve_m1(const MarketParams& params, double lambda_p);

/// Stationarity residual of the minimisation Lagrangian for the phases the
/// case leaves free (t1 for III, t1 and t2 for IV, t3 for II). Case I has
/// no free phase and returns 0.
double kkt_residual(M1Case c, const MarketParams& params, double lambda_p,
                    const ShipmentPolicy& policy);

/// Grid for the brute-force oracle. t_max <= 0 picks a bound automatically.
struct GridSpec {
    double step = 0.005;
    double t_max = 0.0;
};

/// Exhaustive grid search over cycle length T and fast-service length t1.
/// For fixed (T, t1) the objective is increasing in t3, so t3 is set to
/// min(tau, T - t1) and the remainder becomes t2. The returned case label is
/// inferred from the phase pattern.
M1Solution oracle_m1(const MarketParams& params, double lambda_p, const GridSpec& grid);

}  // namespace womops
