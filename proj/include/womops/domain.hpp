#pragma once

#include <string_view>
#include <utility>
#include <vector>

namespace womops {

/// Absolute tolerance used for structural comparisons (phase lengths at a
/// bound, region boundaries).
inline constexpr double kEpsNum = 1e-9;

/// Exogenous economics and operations constants.
struct MarketParams {
    double r = 8.0;          ///< revenue per unit sold
    double K = 2000.0;       ///< fixed cost per shipment
    double h = 4.0;          ///< holding cost per unit per unit time
    double tau = 2.0;        ///< declared maximum delivery time
    double lambda_r = 50.0;  ///< regular demand rate
    double M = 30.0;         ///< membership duration
    double f_min = 10.0;
    double f_max = 100.0;

    /// Throws InvalidParams naming the first violated invariant.
    void validate() const;

    /// Premium demand level at which the delivery-time constraint stops
    /// binding in the myopic problem: 2K / (h tau^2).
    double binding_threshold() const { return 2.0 * K / (h * tau * tau); }
};

enum class FeeFamily { Linear, Logarithmic };

std::string_view to_string(FeeFamily family);
FeeFamily fee_family_from_string(std::string_view name);

/// Member count N(F) and per-member order rate delta.
///
/// Linear:       N(F) = a - b F
/// Logarithmic:  N(F) = a ln(b - F)
struct FeeModel {
    FeeFamily family = FeeFamily::Linear;
    double a = 100.0;
    double b = 1.0;
    double delta = 5.0;

    double members(double fee) const;
    double order_rate(double /*fee*/) const { return delta; }
    bool in_domain(double fee) const;

    /// Checks delta > 0 and that N(F) is defined and nonnegative on
    /// [f_min, f_max]. Throws InvalidParams.
    void validate(double f_min, double f_max) const;
};

/// c1(F) = N(F) * delta. Throws DomainError when F is outside the
/// fee-model domain.
double potential_market(const FeeModel& fee_model, double fee);

/// Phase lengths of one shipment cycle: fast service, no service, regular
/// service, in that order.
struct ShipmentPolicy {
    double t1 = 0.0;
    double t2 = 0.0;
    double t3 = 0.0;

    double cycle_length() const { return t1 + t2 + t3; }
    double max_inventory(double lambda_p, double lambda_r) const {
        return lambda_p * cycle_length() + lambda_r * t1;
    }

    /// Throws InvalidPolicy on a negative phase or a zero-length cycle.
    void validate() const;

    friend bool operator==(const ShipmentPolicy&, const ShipmentPolicy&) = default;
};

enum class SignalKind { MDT, NPS, Weighted };

std::string_view to_string(SignalKind kind);
SignalKind signal_kind_from_string(std::string_view name);

/// Which service signal premium customers observe. A Weighted spec blends
/// the two elementary signals; weights must be nonnegative and sum to 1.
struct SignalSpec {
    SignalKind kind = SignalKind::MDT;
    std::vector<std::pair<SignalKind, double>> weights;

    static SignalSpec mdt() { return {SignalKind::MDT, {}}; }
    static SignalSpec nps() { return {SignalKind::NPS, {}}; }
    static SignalSpec weighted(std::vector<std::pair<SignalKind, double>> w) {
        return {SignalKind::Weighted, std::move(w)};
    }

    void validate() const;
};

/// Observed signal in [0, 1].
///   MDT: t3 / tau
///   NPS: (t2 + t3) / T
double signal(const SignalSpec& spec, const ShipmentPolicy& policy, double tau);

/// Sensitivity exponent of the premium response R(theta) = c1(F) theta^c2.
struct CustomerResponse {
    double c2 = 1.0;
};

/// R(theta) = c1(F) theta^c2 with 0^0 = 1.
double respond(const CustomerResponse& response, const FeeModel& fee_model, double fee,
               double theta);

/// Average profit rate of the myopic model (no fee revenue).
double profit_m1(const MarketParams& params, const ShipmentPolicy& policy, double lambda_p);

/// Average profit rate including membership-fee revenue F lambda_p / (delta M).
double profit_m2(const MarketParams& params, const FeeModel& fee_model,
                 const ShipmentPolicy& policy, double fee, double lambda_p);

}  // namespace womops
