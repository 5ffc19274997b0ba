#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqfn/measure.hpp"

namespace sqfn {

inline constexpr int kDefaultDepthCap = 24;
inline constexpr const char* kReportSchema = "report-v1";
inline constexpr const char* kVersion = "sqfnlab 1.0.0";

struct Tolerances {
    double exact = 1e-12;
    double accumulation = 1e-9;
    double statistical = 0.05;
};

struct ExperimentConfig {
    std::string scenario;
    std::optional<MeasureSpec> mu;  // overrides the scenario's default
    std::optional<MeasureSpec> nu;
    std::optional<int> depth;
    std::optional<double> epsilon;  // unset: derived from the doubling constant of nu
    int shifted = 0;                // 0: standard system only; 2 or 3 shifted systems
    std::string json_path;
    std::string csv_path;
    std::uint64_t seed = 1;
    int points = 16;
    Tolerances tol;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
// FNV-1a of the canonical config JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

struct Check {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    bool passed = true;
    bool hard = true;
    std::string note;
};

struct Report {
    std::string scenario;
    std::vector<Check> checks;
    nlohmann::json measurements = nlohmann::json::object();
    std::vector<std::string> warnings;
    std::string classification;
    std::string profile_csv;
    std::string hash;

    bool passed() const;
    std::vector<std::string> failures() const;
    nlohmann::json to_json() const;
};

struct ScenarioInfo {
    std::string name;
    std::string description;
    int default_depth = 0;
};
std::vector<ScenarioInfo> list_scenarios();

struct Diagnostic {
    enum class Level { error, warning };
    Level level = Level::warning;
    std::string message;
};
// Errors: unknown scenario, depth cap, invalid specs. Warnings: atoms of mu
// on dyadic boundaries up to the working depth.
std::vector<Diagnostic> validate(const ExperimentConfig& c);

// Throws UsageError when validate reports an error.
Report run(const ExperimentConfig& c);

// Exit-code contract: 0 all hard checks pass, 1 some failed, 2 usage error.
int exit_code(const Report& r);

}  // namespace sqfn
