#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sqfn/experiment.hpp"

namespace {

sqfn::ExperimentConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw sqfn::UsageError("cannot open config " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw sqfn::UsageError("config is not valid JSON: " + std::string(e.what()));
    }
    return sqfn::config_from_json(j);
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw sqfn::UsageError("cannot write " + path);
    out << text;
}

int cmd_list() {
    for (const sqfn::ScenarioInfo& s : sqfn::list_scenarios()) {
        std::cout << s.name << "\tdepth " << s.default_depth << "\t" << s.description << "\n";
    }
    return 0;
}

int cmd_validate(const std::string& path) {
    const sqfn::ExperimentConfig c = load(path);
    int code = 0;
    for (const sqfn::Diagnostic& d : sqfn::validate(c)) {
        const bool err = d.level == sqfn::Diagnostic::Level::error;
        std::cout << (err ? "error: " : "warning: ") << d.message << "\n";
        if (err) code = 2;
    }
    if (code == 0) std::cout << "ok\n";
    return code;
}

int cmd_run(const std::string& path, const std::string& out_override) {
    sqfn::ExperimentConfig c = load(path);
    if (!out_override.empty()) c.json_path = out_override;
    const sqfn::Report r = sqfn::run(c);
    const std::string json = r.to_json().dump(2) + "\n";
    if (c.json_path.empty()) std::cout << json;
    else write_file(c.json_path, json);
    if (!c.csv_path.empty()) write_file(c.csv_path, r.profile_csv);
    for (const std::string& w : r.warnings) std::cerr << "warning: " << w << "\n";
    const int code = sqfn::exit_code(r);
    if (code != 0) {
        std::cerr << "failing checks:";
        for (const std::string& f : r.failures()) std::cerr << " " << f;
        std::cerr << "\n";
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Square-function experiments on pairs of measures on [0,1)"};
    app.require_subcommand(1);
    std::string config;
    std::string out;
    CLI::App* run = app.add_subcommand("run", "run a scenario and write its report");
    run->add_option("--config", config, "config JSON")->required();
    run->add_option("--out", out, "report path (overrides outputs.json)");
    app.add_subcommand("list", "list scenarios");
    CLI::App* val = app.add_subcommand("validate", "check a config");
    val->add_option("--config", config, "config JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        if (app.got_subcommand("list")) return cmd_list();
        if (app.got_subcommand("validate")) return cmd_validate(config);
        return cmd_run(config, out);
    } catch (const sqfn::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const sqfn::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
