#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sqfn/alpha.hpp"
#include "sqfn/experiment.hpp"

namespace sqfn::detail {

struct Context {
    const ExperimentConfig& cfg;
    const Measure& mu;
    const Measure& nu;
    int depth;
    Report& report;

    // Records lhs <= rhs.
    void check(const std::string& name, double lhs, double rhs, bool hard = true, const std::string& note = "");
    void skip(const std::string& name, const std::string& why);
};

// JSON-safe number: infinities and NaN become strings.
nlohmann::json num(double x);

struct Scenario {
    ScenarioInfo info;
    MeasureSpec mu;
    MeasureSpec nu;
    std::vector<std::string> aliases;
    std::function<void(Context&, AlphaTable&)> suite;
};

const std::vector<Scenario>& scenarios();
const Scenario* find_scenario(const std::string& name);

// Doubling, forest, Haar/product, Tail-Tip, Carleson comparison, dyadic
// profile, Buckley and CZ checks shared by every scenario.
void common_suite(Context& ctx, AlphaTable& table);

}  // namespace sqfn::detail
