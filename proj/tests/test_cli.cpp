#include <doctest.h>

#include <algorithm>

#include "sqfn/errors.hpp"
#include "sqfn/experiment.hpp"

using namespace sqfn;

namespace {

ExperimentConfig config(const std::string& scenario) {
    ExperimentConfig c;
    c.scenario = scenario;
    return c;
}

bool has(const std::vector<Diagnostic>& d, Diagnostic::Level level, const std::string& text) {
    return std::any_of(d.begin(), d.end(), [&](const Diagnostic& x) {
        return x.level == level && x.message.find(text) != std::string::npos;
    });
}

}  // namespace

TEST_CASE("scenario catalog") {
    const std::vector<ScenarioInfo> s = list_scenarios();
    CHECK(s.size() >= 9);
    for (const char* name : {"identity", "singular-cascade", "cantor", "example22", "example52", "example53",
                             "finite-haar-A∞", "random-histogram-fleet", "oracle-crossval"}) {
        CHECK(std::any_of(s.begin(), s.end(), [&](const ScenarioInfo& i) { return i.name == name; }));
    }
}

TEST_CASE("validation") {
    ExperimentConfig deep = config("identity");
    deep.depth = 40;
    CHECK(has(validate(deep), Diagnostic::Level::error, "depth cap"));
    CHECK_THROWS_AS(run(deep), UsageError);

    CHECK(has(validate(config("nope")), Diagnostic::Level::error, "unknown scenario"));

    ExperimentConfig boundary = config("identity");
    boundary.mu = AtomicSpec{{{0.5, 0.5}, {0.3, 0.5}}};
    boundary.depth = 6;
    CHECK(has(validate(boundary), Diagnostic::Level::warning, "does not charge the boundaries"));
    CHECK(!has(validate(boundary), Diagnostic::Level::error, ""));

    CHECK(validate(config("identity")).empty());
}

TEST_CASE("config round trip and hash") {
    ExperimentConfig c = config("example22");
    c.depth = 9;
    c.epsilon = 0.01;
    c.shifted = 2;
    c.seed = 17;
    c.mu = Example22Spec{5};
    const ExperimentConfig back = config_from_json(config_to_json(c));
    CHECK(config_to_json(back) == config_to_json(c));
    CHECK(config_hash(back) == config_hash(c));
    ExperimentConfig other = c;
    other.seed = 18;
    CHECK(config_hash(other) != config_hash(c));
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"depth", 3}}), UsageError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"scenario", "identity"}, {"systems", "odd"}}), UsageError);
}

TEST_CASE("identity run") {
    const Report r = run(config("identity"));
    CHECK(r.passed());
    CHECK(exit_code(r) == 0);
    CHECK(r.failures().empty());
    const nlohmann::json j = r.to_json();
    CHECK(j.at("schema") == kReportSchema);
    for (const Check& c : r.checks) CHECK(c.slack >= -1e-9);
}

TEST_CASE("reports are deterministic") {
    ExperimentConfig c = config("example22");
    c.depth = 8;
    c.shifted = 2;
    CHECK(run(c).to_json().dump() == run(c).to_json().dump());
}

TEST_CASE("failed hard checks give exit code 1") {
    Report r;
    r.checks.push_back(Check{"x", 1.0, 0.0, -1.0, false, true, ""});
    r.checks.push_back(Check{"y", 0.0, 1.0, 1.0, true, true, ""});
    CHECK(exit_code(r) == 1);
    REQUIRE(r.failures().size() == 1);
    CHECK(r.failures()[0].find("x") != std::string::npos);
    r.checks[0].hard = false;
    CHECK(exit_code(r) == 0);
}
