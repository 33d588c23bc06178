#include "womops/domain.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "womops/errors.hpp"

namespace womops {
namespace {

void require(bool ok, const char* what) {
    if (!ok) throw InvalidParams(what);
}

double elementary_signal(SignalKind kind, const ShipmentPolicy& policy, double tau) {
    switch (kind) {
        case SignalKind::MDT:
            return policy.t3 / tau;
        case SignalKind::NPS:
            return (policy.t2 + policy.t3) / policy.cycle_length();
        case SignalKind::Weighted:
            break;
    }
    throw UnsupportedSignal("nested weighted signal");
}

}  // namespace

void MarketParams::validate() const {
    require(r > 0, "r must be > 0");
    require(K > 0, "K must be > 0");
    require(h > 0, "h must be > 0");
    require(tau > 0, "tau must be > 0");
    require(lambda_r >= 0, "lambda_r must be >= 0");
    require(M > 0, "M must be > 0");
    require(f_min >= 0, "f_min must be >= 0");
    require(f_min <= f_max, "f_min must be <= f_max");
}

std::string_view to_string(FeeFamily family) {
    return family == FeeFamily::Linear ? "linear" : "logarithmic";
}

FeeFamily fee_family_from_string(std::string_view name) {
    if (name == "linear") return FeeFamily::Linear;
    if (name == "logarithmic" || name == "log") return FeeFamily::Logarithmic;
    throw InvalidParams("unknown fee family '" + std::string(name) + "'");
}

double FeeModel::members(double fee) const {
    if (!in_domain(fee)) {
        throw DomainError("fee " + std::to_string(fee) + " outside the " +
                          std::string(to_string(family)) + " fee-model domain");
    }
    if (family == FeeFamily::Linear) return a - b * fee;
    return a * std::log(b - fee);
}

// The logarithmic family is closed at b - F = 1 (N = 0) so that the upper
// fee bound may switch the premium service off.
bool FeeModel::in_domain(double fee) const {
    if (!std::isfinite(fee)) return false;
    if (family == FeeFamily::Linear) return a - b * fee >= -kEpsNum;
    return b - fee >= 1.0 - kEpsNum;
}

void FeeModel::validate(double f_min, double f_max) const {
    require(delta > 0, "fee_model.delta must be > 0");
    if (family == FeeFamily::Linear) {
        // N is monotone in F, so checking both ends suffices.
        require(a - b * f_min >= -kEpsNum && a - b * f_max >= -kEpsNum,
                "linear N(F) = a - bF must be >= 0 on [f_min, f_max]");
    } else {
        require(a >= 0, "logarithmic N(F) needs a >= 0");
        require(b - f_max >= 1.0 - kEpsNum,
                "logarithmic N(F) = a ln(b - F) needs b - F >= 1 on [f_min, f_max]");
    }
}

double potential_market(const FeeModel& fee_model, double fee) {
    return std::max(0.0, fee_model.members(fee)) * fee_model.order_rate(fee);
}

void ShipmentPolicy::validate() const {
    if (!(t1 >= 0 && t2 >= 0 && t3 >= 0)) throw InvalidPolicy("phase lengths must be >= 0");
    if (!(cycle_length() > 0)) throw InvalidPolicy("cycle length must be > 0");
}

std::string_view to_string(SignalKind kind) {
    switch (kind) {
        case SignalKind::MDT: return "MDT";
        case SignalKind::NPS: return "NPS";
        case SignalKind::Weighted: return "Weighted";
    }
    return "?";
}

SignalKind signal_kind_from_string(std::string_view name) {
    if (name == "MDT" || name == "mdt") return SignalKind::MDT;
    if (name == "NPS" || name == "nps") return SignalKind::NPS;
    if (name == "Weighted" || name == "weighted") return SignalKind::Weighted;
    throw InvalidParams("unknown signal kind '" + std::string(name) + "'");
}

void SignalSpec::validate() const {
    if (kind != SignalKind::Weighted) return;
    require(!weights.empty(), "weighted signal needs at least one weight");
    double total = 0.0;
    for (const auto& [k, w] : weights) {
        require(k != SignalKind::Weighted, "weighted signal components must be MDT or NPS");
        require(w >= 0, "signal weights must be >= 0");
        total += w;
    }
    require(std::abs(total - 1.0) <= 1e-9, "signal weights must sum to 1");
}

double signal(const SignalSpec& spec, const ShipmentPolicy& policy, double tau) {
    policy.validate();
    if (spec.kind != SignalKind::Weighted) return elementary_signal(spec.kind, policy, tau);
    double theta = 0.0;
    for (const auto& [k, w] : spec.weights) theta += w * elementary_signal(k, policy, tau);
    return theta;
}

double respond(const CustomerResponse& response, const FeeModel& fee_model, double fee,
               double theta) {
    const double c1 = potential_market(fee_model, fee);
    // std::pow(0, 0) is 1, which is the insensitive-customer convention.
    return c1 * std::pow(theta, response.c2);
}

double profit_m1(const MarketParams& p, const ShipmentPolicy& policy, double lambda_p) {
    policy.validate();
    const double T = policy.cycle_length();
    return p.r * lambda_p + p.r * p.lambda_r * (policy.t1 + policy.t3) / T -
           p.h * lambda_p * T / 2.0 - p.h * p.lambda_r * policy.t1 * policy.t1 / (2.0 * T) -
           p.K / T;
}

double profit_m2(const MarketParams& p, const FeeModel& fee_model, const ShipmentPolicy& policy,
                 double fee, double lambda_p) {
    if (!fee_model.in_domain(fee)) throw DomainError("fee outside fee-model domain");
    return profit_m1(p, policy, lambda_p) +
           fee * lambda_p / (fee_model.order_rate(fee) * p.M);
}

}  // namespace womops
