#include "womops/config.hpp"

#include <fstream>
#include <set>

#include "womops/errors.hpp"

namespace womops {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

// Reads one JSON object, remembering which keys were consumed so that
// leftovers can be reported as unknown fields.
class ObjectReader {
public:
    ObjectReader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    const std::string& path() const { return path_; }
    std::string child(const std::string& key) const { return join(path_, key); }

    const json* get(const std::string& key) {
        seen_.insert(key);
        const auto it = node_.find(key);
        return it == node_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out) {
        if (const json* v = get(key)) {
            if (!v->is_number()) throw ConfigError(child(key), "expected a number");
            out = v->get<double>();
        }
    }

    void integer(const std::string& key, int& out) {
        if (const json* v = get(key)) {
            if (!v->is_number_integer()) throw ConfigError(child(key), "expected an integer");
            out = v->get<int>();
        }
    }

    void unsigned_integer(const std::string& key, std::uint64_t& out) {
        if (const json* v = get(key)) {
            if (!v->is_number_unsigned()) throw ConfigError(child(key), "expected a nonnegative integer");
            out = v->get<std::uint64_t>();
        }
    }

    void string(const std::string& key, std::string& out) {
        if (const json* v = get(key)) {
            if (!v->is_string()) throw ConfigError(child(key), "expected a string");
            out = v->get<std::string>();
        }
    }

    void numbers(const std::string& key, std::vector<double>& out) {
        if (const json* v = get(key)) {
            if (!v->is_array()) throw ConfigError(child(key), "expected an array of numbers");
            std::vector<double> vals;
            for (std::size_t i = 0; i < v->size(); ++i) {
                if (!(*v)[i].is_number()) {
                    throw ConfigError(child(key) + "[" + std::to_string(i) + "]", "expected a number");
                }
                vals.push_back((*v)[i].get<double>());
            }
            out = std::move(vals);
        }
    }

    template <class Parse>
    void enumeration(const std::string& key, Parse parse) {
        if (const json* v = get(key)) {
            if (!v->is_string()) throw ConfigError(child(key), "expected a string");
            try {
                parse(v->get<std::string>());
            } catch (const InvalidParams& e) {
                throw ConfigError(child(key), e.what());
            }
        }
    }

    void finish() const {
        for (const auto& [key, value] : node_.items()) {
            if (!seen_.count(key)) throw ConfigError(child(key), "unknown field");
        }
    }

private:
    const json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

// Runs a validator and maps its error onto a field path. Validation messages
// start with the field name when one field is to blame.
template <class Fn>
void validated(const std::string& section, const std::set<std::string>& fields, Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        const std::string msg = e.what();
        std::string field = msg.substr(0, msg.find(' '));
        if (const auto dot = field.rfind('.'); dot != std::string::npos) field = field.substr(dot + 1);
        throw ConfigError(fields.count(field) ? join(section, field) : section, msg);
    }
}

MarketParams parse_market(const json& node, const std::string& path, MarketParams p) {
    ObjectReader in(node, path);
    in.number("r", p.r);
    in.number("K", p.K);
    in.number("h", p.h);
    in.number("tau", p.tau);
    in.number("lambda_r", p.lambda_r);
    in.number("M", p.M);
    in.number("f_min", p.f_min);
    in.number("f_max", p.f_max);
    in.finish();
    return p;
}

FeeModel parse_fee_model(const json& node, const std::string& path, FeeModel fm) {
    ObjectReader in(node, path);
    in.enumeration("family", [&](const std::string& s) { fm.family = fee_family_from_string(s); });
    in.number("a", fm.a);
    in.number("b", fm.b);
    in.number("delta", fm.delta);
    in.finish();
    return fm;
}

SignalSpec parse_signal(const json& node, const std::string& path) {
    SignalSpec spec;
    ObjectReader in(node, path);
    in.enumeration("kind", [&](const std::string& s) { spec.kind = signal_kind_from_string(s); });
    if (const json* w = in.get("weights")) {
        if (!w->is_array()) throw ConfigError(in.child("weights"), "expected an array");
        for (std::size_t i = 0; i < w->size(); ++i) {
            ObjectReader item((*w)[i], in.child("weights") + "[" + std::to_string(i) + "]");
            SignalKind kind = SignalKind::MDT;
            double weight = 0.0;
            if (!(*w)[i].contains("kind") || !(*w)[i].contains("weight")) {
                throw ConfigError(item.path(), "needs 'kind' and 'weight'");
            }
            item.enumeration("kind", [&](const std::string& s) { kind = signal_kind_from_string(s); });
            item.number("weight", weight);
            item.finish();
            spec.weights.emplace_back(kind, weight);
        }
    }
    in.finish();
    return spec;
}

SearchSpec parse_search(const json& node, const std::string& path) {
    SearchSpec s;
    ObjectReader in(node, path);
    in.integer("time_points", s.time_points);
    in.integer("fee_points", s.fee_points);
    in.integer("top_n", s.top_n);
    in.number("tolerance", s.tolerance);
    in.integer("max_iterations", s.max_iterations);
    in.finish();
    validated(path, {"time_points", "fee_points", "top_n", "tolerance", "max_iterations"},
              [&] { s.validate(); });
    return s;
}

json weights_json(const SignalSpec& spec) {
    json out = json::array();
    for (const auto& [k, w] : spec.weights) {
        out.push_back({{"kind", std::string(to_string(k))}, {"weight", w}});
    }
    return out;
}

RecoveryClass recovery_class_from_string(const std::string& s, const std::string& path) {
    for (RecoveryClass c : {RecoveryClass::OptEq, RecoveryClass::NonOptEq, RecoveryClass::Cycles,
                            RecoveryClass::Undetermined}) {
        if (to_string(c) == s) return c;
    }
    throw ConfigError(path, "unknown decision '" + s + "'");
}

M2Branch branch_from_string(const std::string& s, const std::string& path) {
    for (M2Branch b : {M2Branch::NumericInterior, M2Branch::NumericBoundary,
                       M2Branch::ClosedFormInteriorFee, M2Branch::ClosedFormBoundaryFee}) {
        if (to_string(b) == s) return b;
    }
    throw ConfigError(path, "unknown branch '" + s + "'");
}

}  // namespace

// --- serialisation ----------------------------------------------------------

json to_json(const MarketParams& p) {
    return {{"r", p.r},   {"K", p.K}, {"h", p.h},         {"tau", p.tau},
            {"lambda_r", p.lambda_r}, {"M", p.M}, {"f_min", p.f_min}, {"f_max", p.f_max}};
}

json to_json(const FeeModel& fm) {
    return {{"family", std::string(to_string(fm.family))}, {"a", fm.a}, {"b", fm.b},
            {"delta", fm.delta}};
}

json to_json(const SignalSpec& s) {
    json out{{"kind", std::string(to_string(s.kind))}};
    if (s.kind == SignalKind::Weighted) out["weights"] = weights_json(s);
    return out;
}

json to_json(const SearchSpec& s) {
    return {{"time_points", s.time_points}, {"fee_points", s.fee_points}, {"top_n", s.top_n},
            {"tolerance", s.tolerance},     {"max_iterations", s.max_iterations}};
}

json to_json(const ExperimentConfig& c) {
    json families = json::array();
    for (FeeFamily f : c.fee_families) families.push_back(std::string(to_string(f)));
    return {{"r", c.r},
            {"K", c.K},
            {"tau", c.tau},
            {"c2", c.c2},
            {"delta", c.delta},
            {"M", c.M},
            {"fee_families", families},
            {"linear", {{"a", c.linear.a}, {"b", c.linear.b}}},
            {"logarithmic", {{"a", c.logarithmic.a}, {"b", c.logarithmic.b}}},
            {"h", c.base.h},
            {"lambda_r", c.base.lambda_r},
            {"f_min", c.base.f_min},
            {"f_max", c.base.f_max},
            {"signal", std::string(to_string(c.signal))},
            {"search", to_json(c.search)},
            {"recovery",
             {{"max_iters", c.recovery.max_iters},
              {"sim_tol", c.recovery.sim_tol},
              {"match_tol", c.recovery.match_tol}}},
            {"output_dir", c.output_dir},
            {"seed", c.seed},
            {"threads", c.threads}};
}

json to_json(const CliConfig& c) {
    return {{"schema", kConfigSchema},
            {"market", to_json(c.market)},
            {"fee_model", to_json(c.fee_model)},
            {"response", {{"c2", c.response.c2}}},
            {"signal", to_json(c.signal)},
            {"fee", c.fee},
            {"search", to_json(c.search)},
            {"experiment", to_json(c.experiment)}};
}

json to_json(const ShipmentPolicy& s) { return {{"t1", s.t1}, {"t2", s.t2}, {"t3", s.t3}}; }

json to_json(const M1Solution& s) {
    return {{"policy", to_json(s.policy)},
            {"case", std::string(to_string(s.case_id))},
            {"profit", s.profit},
            {"lambda_p", s.lambda_p_in}};
}

json to_json(const M2Solution& s) {
    return {{"policy", to_json(s.policy)},
            {"fee", s.fee},
            {"lambda_p", s.lambda_p_eq},
            {"profit", s.profit},
            {"branch", std::string(to_string(s.branch))}};
}

json to_json(const LongRunClass& c) {
    json out{{"kind", std::string(to_string(c.kind))}, {"tolerance", c.tolerance}};
    if (c.kind == LongRunKind::Cycle2) {
        out["cycle_high"] = c.cycle_high;
        out["cycle_low"] = c.cycle_low;
    } else if (c.kind != LongRunKind::Undetermined) {
        out["limit"] = c.limit;
    }
    return out;
}

json to_json(const ResultRow& r) {
    return {{"tau", r.tau},
            {"c2", r.c2},
            {"K", r.K},
            {"r", r.r},
            {"M", r.M},
            {"signal", std::string(to_string(r.signal))},
            {"fee_family", std::string(to_string(r.fee_family))},
            {"delta", r.delta},
            {"t1", r.t1},
            {"t2", r.t2},
            {"t3", r.t3},
            {"F", r.F},
            {"lambda_p", r.lambda_p},
            {"profit", r.profit},
            {"no_wom_decision", std::string(to_string(r.no_wom_decision))},
            {"branch", std::string(to_string(r.branch))}};
}

// --- parsing ----------------------------------------------------------------

ResultRow parse_result_row(const json& node, const std::string& path) {
    ResultRow r;
    ObjectReader in(node, path);
    for (auto [key, dst] : {std::pair{"tau", &r.tau}, {"c2", &r.c2}, {"K", &r.K}, {"r", &r.r},
                            {"M", &r.M}, {"delta", &r.delta}, {"t1", &r.t1}, {"t2", &r.t2},
                            {"t3", &r.t3}, {"F", &r.F}, {"lambda_p", &r.lambda_p},
                            {"profit", &r.profit}}) {
        in.number(key, *dst);
    }
    in.enumeration("signal", [&](const std::string& s) { r.signal = signal_kind_from_string(s); });
    in.enumeration("fee_family", [&](const std::string& s) { r.fee_family = fee_family_from_string(s); });
    std::string decision = "Undetermined";
    std::string branch = "NumericInterior";
    in.string("no_wom_decision", decision);
    in.string("branch", branch);
    in.finish();
    r.no_wom_decision = recovery_class_from_string(decision, in.child("no_wom_decision"));
    r.branch = branch_from_string(branch, in.child("branch"));
    return r;
}

ExperimentConfig parse_experiment(const json& node, const std::string& path) {
    ExperimentConfig c;
    ObjectReader in(node, path);
    in.numbers("r", c.r);
    in.numbers("K", c.K);
    in.numbers("tau", c.tau);
    in.numbers("c2", c.c2);
    in.numbers("delta", c.delta);
    in.numbers("M", c.M);
    if (const json* v = in.get("fee_families")) {
        if (!v->is_array()) throw ConfigError(in.child("fee_families"), "expected an array");
        c.fee_families.clear();
        for (std::size_t i = 0; i < v->size(); ++i) {
            const std::string item_path = in.child("fee_families") + "[" + std::to_string(i) + "]";
            if (!(*v)[i].is_string()) throw ConfigError(item_path, "expected a string");
            try {
                c.fee_families.push_back(fee_family_from_string((*v)[i].get<std::string>()));
            } catch (const InvalidParams& e) {
                throw ConfigError(item_path, e.what());
            }
        }
    }
    for (auto [key, fm] : {std::pair{"linear", &c.linear}, {"logarithmic", &c.logarithmic}}) {
        if (const json* v = in.get(key)) {
            ObjectReader sub(*v, in.child(key));
            sub.number("a", fm->a);
            sub.number("b", fm->b);
            sub.finish();
        }
    }
    in.number("h", c.base.h);
    in.number("lambda_r", c.base.lambda_r);
    in.number("f_min", c.base.f_min);
    in.number("f_max", c.base.f_max);
    in.enumeration("signal", [&](const std::string& s) { c.signal = signal_kind_from_string(s); });
    if (const json* v = in.get("search")) c.search = parse_search(*v, in.child("search"));
    if (const json* v = in.get("recovery")) {
        ObjectReader sub(*v, in.child("recovery"));
        sub.integer("max_iters", c.recovery.max_iters);
        sub.number("sim_tol", c.recovery.sim_tol);
        sub.number("match_tol", c.recovery.match_tol);
        sub.finish();
    }
    in.string("output_dir", c.output_dir);
    in.unsigned_integer("seed", c.seed);
    in.integer("threads", c.threads);
    in.finish();
    validated(path,
              {"r", "K", "tau", "c2", "delta", "M", "fee_families", "linear", "logarithmic", "h",
               "lambda_r", "f_min", "f_max", "signal", "recovery", "threads"},
              [&] { c.validate(); });
    return c;
}

CliConfig parse_config(const json& doc) {
    CliConfig c;
    ObjectReader in(doc, "");
    if (const json* v = in.get("schema")) {
        if (!v->is_number_integer() || v->get<int>() != kConfigSchema) {
            throw ConfigError("schema", "unsupported schema version (expected 1)");
        }
    }
    if (const json* v = in.get("market")) c.market = parse_market(*v, "market", c.market);
    if (const json* v = in.get("fee_model")) c.fee_model = parse_fee_model(*v, "fee_model", c.fee_model);
    if (const json* v = in.get("response")) {
        ObjectReader sub(*v, "response");
        sub.number("c2", c.response.c2);
        sub.finish();
    }
    if (const json* v = in.get("signal")) c.signal = parse_signal(*v, "signal");
    in.number("fee", c.fee);
    if (const json* v = in.get("search")) c.search = parse_search(*v, "search");
    if (const json* v = in.get("experiment")) c.experiment = parse_experiment(*v, "experiment");
    in.finish();
    c.validate();
    return c;
}

CliConfig load_config(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) throw ConfigError("<file>", "cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(file);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", std::string("malformed JSON: ") + e.what());
    }
    return parse_config(doc);
}

void CliConfig::validate() const {
    validated("market", {"r", "K", "h", "tau", "lambda_r", "M", "f_min", "f_max"},
              [&] { market.validate(); });
    validated("fee_model", {"delta"}, [&] { fee_model.validate(market.f_min, market.f_max); });
    if (!(response.c2 >= 0)) throw ConfigError("response.c2", "c2 must be >= 0");
    validated("signal", {"weights"}, [&] { signal.validate(); });
    if (!(fee >= market.f_min && fee <= market.f_max)) {
        throw ConfigError("fee", "fee must lie in [market.f_min, market.f_max]");
    }
}

M2Problem CliConfig::problem() const { return M2Problem{market, fee_model, response, signal}; }

FeedbackSystem CliConfig::system() const {
    return FeedbackSystem{market, fee_model, response, signal, fee};
}

json to_json(const DynamicsTrace& trace) {
    json rows = json::array();
    for (const IterationRecord& r : trace.iterations) {
        rows.push_back({{"k", r.k},
                        {"lambda_p", r.lambda_p},
                        {"policy", to_json(r.policy)},
                        {"case", std::string(to_string(r.case_id))},
                        {"profit", r.profit}});
    }
    json out{{"iterations", rows},
             {"classification", to_json(trace.classification)},
             {"settled_at", trace.settled_at}};
    if (trace.prediction) out["prediction"] = to_json(*trace.prediction);
    return out;
}

json to_json(const RecoveryReport& rep) {
    json out{{"label", std::string(to_string(rep.label))},
             {"lambda_p_eq", rep.lambda_p_eq},
             {"m2_profit", rep.m2_profit},
             {"long_run_lambda_p", rep.long_run_lambda_p},
             {"long_run_profit", rep.long_run_profit},
             {"shortfall", rep.shortfall},
             {"classification", to_json(rep.trace.classification)},
             {"iterations", rep.trace.iterations.size()}};
    if (rep.demand_limit) {
        out["demand_limit"] = {{"equality_expected", rep.demand_limit->equality_expected},
                               {"lambda_bar_predicted", rep.demand_limit->lambda_bar_predicted},
                               {"holds", rep.demand_limit->holds}};
    }
    return out;
}

}  // namespace womops
