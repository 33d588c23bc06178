#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "womops/domain.hpp"
#include "womops/dynamics.hpp"
#include "womops/experiments.hpp"
#include "womops/m2_solver.hpp"

namespace womops {

inline constexpr int kConfigSchema = 1;

/// Everything a command can be configured with. Every field is optional in
/// the JSON file; missing fields keep these defaults (the Table 3 / Table 7
/// setup: linear N(F) = 100 - F, delta = 5, tau = 2, c2 = 1, F = 10).
struct CliConfig {
    MarketParams market;
    FeeModel fee_model;
    CustomerResponse response;
    SignalSpec signal = SignalSpec::mdt();
    double fee = 10.0;  ///< fixed fee for solve-m1 / simulate
    SearchSpec search;
    ExperimentConfig experiment;

    /// Runs every module-level validation; throws ConfigError with the field
    /// path.
    void validate() const;

    M2Problem problem() const;
    FeedbackSystem system() const;
};

/// Strict parse: unknown keys, wrong types and invalid values throw
/// ConfigError naming the path (e.g. "market.K").
CliConfig parse_config(const nlohmann::json& doc);
CliConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const CliConfig& config);
nlohmann::json to_json(const ExperimentConfig& config);
nlohmann::json to_json(const MarketParams& params);
nlohmann::json to_json(const FeeModel& fee_model);
nlohmann::json to_json(const SignalSpec& signal);
nlohmann::json to_json(const SearchSpec& search);
nlohmann::json to_json(const ShipmentPolicy& policy);
nlohmann::json to_json(const M1Solution& solution);
nlohmann::json to_json(const M2Solution& solution);
nlohmann::json to_json(const ResultRow& row);
nlohmann::json to_json(const LongRunClass& c);
nlohmann::json to_json(const DynamicsTrace& trace);
nlohmann::json to_json(const RecoveryReport& report);

ExperimentConfig parse_experiment(const nlohmann::json& node, const std::string& path);
ResultRow parse_result_row(const nlohmann::json& node, const std::string& path);

}  // namespace womops
