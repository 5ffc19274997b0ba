#include "sqfn/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "scenario_registry.hpp"
#include "sqfn/squarefn.hpp"
#include "sqfn/tree.hpp"
#include "sqfn/whitney.hpp"

namespace sqfn {

namespace detail {

nlohmann::json num(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

void Context::check(const std::string& name, double lhs, double rhs, bool hard, const std::string& note) {
    Check c;
    c.name = name;
    c.lhs = lhs;
    c.rhs = rhs;
    c.slack = rhs - lhs;
    c.passed = lhs <= rhs;
    c.hard = hard;
    c.note = note;
    report.checks.push_back(std::move(c));
}

void Context::skip(const std::string& name, const std::string& why) {
    Check c;
    c.name = name;
    c.hard = false;
    c.note = "skipped: " + why;
    report.checks.push_back(std::move(c));
}

void common_suite(Context& ctx, AlphaTable& table) {
    const Measure& mu = ctx.mu;
    const Measure& nu = ctx.nu;
    nlohmann::json& out = ctx.report.measurements;
    const double exact = ctx.cfg.tol.exact;
    const double accum = ctx.cfg.tol.accumulation;
    std::mt19937_64 rng(ctx.cfg.seed);

    const DoublingReport dn = doubling_constant(nu, DyadicSystem::standard(), std::min(ctx.depth, 16));
    out["doubling_nu"] = num(dn.constant);
    if (!dn.finite) ctx.report.warnings.push_back("nu vanishes on " + dn.worst.to_string() + "; not dyadically doubling");

    if (mu.is_zero()) {
        ctx.skip("forest", "mu is the zero measure");
        return;
    }

    // Profile first: it only needs alpha.
    const int pd = std::min(ctx.depth, 20);
    const std::vector<double> points = sample_points(mu, pd, ctx.cfg.points, ctx.cfg.seed);
    const SquareFunctionProfile prof = dyadic_square_profile(table, points, pd);
    ctx.report.profile_csv = prof.to_csv();
    const std::vector<double> mean = prof.mean();
    const double increments = mean.back() - mean[static_cast<std::size_t>(pd / 2)];
    const double slope = pd >= 2 ? profile_slope(prof, pd / 2, pd) : 0.0;
    out["profile"] = prof.to_json();
    out["profile_slope"] = slope;
    out["profile_tail_increment"] = increments;
    if (!prof.boundary_points.empty()) {
        ctx.report.warnings.push_back("profile points on dyadic boundaries; the square function assumes mu does not "
                                      "charge the boundaries");
    }
    if (increments < 1e-6) ctx.report.classification = "absolutely continuous";
    else if (slope > 1e-4) ctx.report.classification = "singular";
    else ctx.report.classification = "undetermined";

    // Share of mu on cells where mu/nu exceeds 16 at the profile depth.
    double score = 0.0;
    {
        const int sd = std::min(pd, 16);
        const double len = std::ldexp(1.0, -sd);
        for (std::int64_t k = 0; k < (std::int64_t{1} << sd); ++k) {
            const double m = mu.mass(k * len, (k + 1) * len);
            const double n = nu.mass(k * len, (k + 1) * len);
            if (m > 0.0 && (n == 0.0 || m > 16.0 * n)) score += m;
        }
        out["singular_score"] = score / mu.total();
    }

    const int bd = std::min(ctx.depth, 16);
    out["buckley_delta"] = buckley_ratio(table, Coefficient::delta, bd);
    out["carleson_delta_root"] = carleson_sum(table, table.system().root(), Coefficient::delta, bd);

    if (!dn.finite) {
        ctx.report.classification = "not applicable: nu is not doubling";
        ctx.skip("forest", "nu is not dyadically doubling");
        ctx.skip("cz", "nu is not dyadically doubling");
        return;
    }

    const double eps = ctx.cfg.epsilon ? *ctx.cfg.epsilon : epsilon_for_doubling(dn.constant).epsilon;
    out["epsilon"] = eps;
    const int fd = std::min(ctx.depth, 12);
    const Forest forest = stopping_forest(table, eps, fd);
    std::size_t members = 0, largest = 0, nulls = 0;
    bool coherent = true;
    for (const Tree& t : forest.trees) {
        const std::size_t s = t.size();
        members += s;
        largest = std::max(largest, s);
        if (t.null_top()) ++nulls;
        coherent = coherent && t.verify();
    }
    out["forest"] = {{"trees", forest.trees.size()}, {"members", members}, {"largest", largest}, {"null_trees", nulls}};
    ctx.check("forest_coherent", coherent ? 0.0 : 1.0, 0.0);

    // Haar analysis and the product representation on the larger trees.
    std::vector<const Tree*> big;
    for (const Tree& t : forest.trees) {
        if (!t.null_top() && t.size() >= 3) big.push_back(&t);
    }
    std::stable_sort(big.begin(), big.end(), [](const Tree* a, const Tree* b) { return a->size() > b->size(); });
    if (big.size() > 8) big.resize(8);
    double product_err = 0.0, parseval_err = 0.0, carleson_ratio = 0.0, tail_slack = INFINITY;
    int haar_trees = 0, tail_checks = 0;
    bool tail_holds = true;
    for (const Tree* t : big) {
        try {
            const HaarSystem h(mu, nu, *t);
            ++haar_trees;
            const std::vector<DyadicInterval> mem = t->members();
            std::uniform_int_distribution<std::size_t> pick(0, mem.size() - 1);
            for (int n = 0; n < 100; ++n) {
                const ProductCheck p = product_check(h, mem[pick(rng)]);
                product_err = std::max(product_err, std::abs(p.lhs - p.rhs) / std::max(1.0, std::abs(p.rhs)));
            }
            const GNorm g = g_l2_norm(h, t->max_level() + 1);
            parseval_err = std::max(parseval_err, std::abs(g.orthogonal - g.quadrature));
        } catch (const DomainError& e) {
            ctx.report.warnings.push_back(std::string("haar analysis skipped on ") + t->top().to_string() + ": " + e.what());
        }
        const TreeDoublingReport td = tree_doubling_check(mu, *t, INFINITY);
        if (std::isfinite(td.worst_ratio)) {
            carleson_ratio = std::max(carleson_ratio, carleson_comparison(table, *t, td.worst_ratio).ratio);
        }
        // Tail-Tip on the two shallowest and two deepest interior members.
        std::vector<DyadicInterval> interior;
        t->for_each_member([&](const DyadicInterval& i) {
            if (t->is_interior(i)) interior.push_back(i);
        });
        std::stable_sort(interior.begin(), interior.end(),
                         [](const DyadicInterval& a, const DyadicInterval& b) { return a.level < b.level; });
        std::vector<DyadicInterval> chosen;
        for (std::size_t k = 0; k < interior.size(); ++k) {
            if (k < 2 || k + 2 >= interior.size()) chosen.push_back(interior[k]);
        }
        for (const DyadicInterval& i : chosen) {
            const auto [n1, n2] = tree_tail_indices(*t, i);
            try {
                const TailTipCheck c = tailtip_check(mu, nu, i, 1.0 / 16.0, n1, n2);
                ++tail_checks;
                tail_holds = tail_holds && c.holds;
                tail_slack = std::min(tail_slack, c.slack);
            } catch (const PreconditionError& e) {
                ctx.report.warnings.push_back(std::string("tail-tip skipped: ") + e.what());
            }
        }
    }
    out["haar_trees"] = haar_trees;
    out["carleson_comparison_ratio"] = carleson_ratio;
    if (haar_trees > 0) {
        ctx.check("product_representation", product_err, 1e-10);
        ctx.check("haar_parseval", parseval_err, accum);
    } else {
        ctx.skip("product_representation", "no tree with three or more members and positive masses");
    }
    if (tail_checks > 0) {
        ctx.check("tail_tip", tail_holds ? 0.0 : 1.0, 0.0, true, "min slack " + std::to_string(tail_slack) + " over " + std::to_string(tail_checks));
        out["tail_tip_min_slack"] = tail_slack;
    }

    const int cd = std::min(ctx.depth, 10);
    try {
        const CZDecomposition cz = cz_decompose(mu, nu, 2.0, cd);
        out["cz"] = cz.to_json();
        ctx.check("cz_reconstruction", cz.reconstruction_error, exact);
        ctx.check("cz_bad_mass_zero", cz.max_bad_total, exact);
        ctx.check("cz_nu_bad", cz.nu_bad, 1.0 / cz.lambda, true, "strict inequality required");
        ctx.check("cz_good_density", cz.good_density, cz.doubling * cz.lambda * (1.0 + exact));
        if (!(cz.nu_bad < 1.0 / cz.lambda)) ctx.report.checks.back().passed = false;
    } catch (const PreconditionError& e) {
        ctx.skip("cz", e.what());
    }
}

}  // namespace detail

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

int resolved_depth(const ExperimentConfig& c, const detail::Scenario* s) {
    if (c.depth) return *c.depth;
    return s ? s->info.default_depth : 12;
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw UsageError("config must be a JSON object");
    ExperimentConfig c;
    try {
        c.scenario = j.at("scenario").get<std::string>();
        if (j.contains("mu")) c.mu = spec_from_json(j.at("mu"));
        if (j.contains("nu")) c.nu = spec_from_json(j.at("nu"));
        if (j.contains("depth")) c.depth = j.at("depth").get<int>();
        if (j.contains("epsilon")) {
            const auto& e = j.at("epsilon");
            if (!(e.is_string() && e.get<std::string>() == "auto")) c.epsilon = e.get<double>();
        }
        if (j.contains("systems")) {
            const std::string s = j.at("systems").get<std::string>();
            if (s == "standard") c.shifted = 0;
            else if (s == "shifted2") c.shifted = 2;
            else if (s == "shifted3") c.shifted = 3;
            else throw UsageError("systems must be standard, shifted2 or shifted3");
        }
        if (j.contains("outputs")) {
            const auto& o = j.at("outputs");
            c.json_path = o.value("json", "");
            c.csv_path = o.value("csv", "");
        }
        c.seed = j.value("seed", std::uint64_t{1});
        c.points = j.value("points", 16);
        if (j.contains("tolerances")) {
            const auto& t = j.at("tolerances");
            c.tol.exact = t.value("exact", c.tol.exact);
            c.tol.accumulation = t.value("accumulation", c.tol.accumulation);
            c.tol.statistical = t.value("statistical", c.tol.statistical);
        }
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("bad config: ") + e.what());
    } catch (const ParameterError& e) {
        throw UsageError(std::string("bad config: ") + e.what());
    }
    return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["scenario"] = c.scenario;
    if (c.mu) j["mu"] = to_json(*c.mu);
    if (c.nu) j["nu"] = to_json(*c.nu);
    if (c.depth) j["depth"] = *c.depth;
    if (c.epsilon) j["epsilon"] = *c.epsilon;
    else j["epsilon"] = "auto";
    j["systems"] = c.shifted == 0 ? "standard" : "shifted" + std::to_string(c.shifted);
    j["outputs"] = {{"json", c.json_path}, {"csv", c.csv_path}};
    j["seed"] = c.seed;
    j["points"] = c.points;
    j["tolerances"] = {{"exact", c.tol.exact}, {"accumulation", c.tol.accumulation}, {"statistical", c.tol.statistical}};
    return j;
}

std::string config_hash(const ExperimentConfig& c) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(config_to_json(c).dump())));
    return buf;
}

bool Report::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed || !c.hard; });
}

std::vector<std::string> Report::failures() const {
    std::vector<std::string> out;
    for (const Check& c : checks) {
        if (c.hard && !c.passed) out.push_back(c.name);
    }
    return out;
}

nlohmann::json Report::to_json() const {
    nlohmann::json j;
    j["schema"] = kReportSchema;
    j["scenario"] = scenario;
    j["provenance"] = {{"config_hash", hash}, {"version", kVersion}};
    nlohmann::json cs = nlohmann::json::array();
    for (const Check& c : checks) {
        cs.push_back({{"name", c.name},
                      {"lhs", detail::num(c.lhs)},
                      {"rhs", detail::num(c.rhs)},
                      {"slack", detail::num(c.slack)},
                      {"passed", c.passed},
                      {"hard", c.hard},
                      {"note", c.note}});
    }
    j["checks"] = cs;
    j["measurements"] = measurements;
    j["warnings"] = warnings;
    j["classification"] = classification;
    j["passed"] = passed();
    j["failures"] = failures();
    return j;
}

std::vector<ScenarioInfo> list_scenarios() {
    std::vector<ScenarioInfo> out;
    for (const detail::Scenario& s : detail::scenarios()) out.push_back(s.info);
    return out;
}

std::vector<Diagnostic> validate(const ExperimentConfig& c) {
    std::vector<Diagnostic> d;
    auto error = [&](std::string m) { d.push_back({Diagnostic::Level::error, std::move(m)}); };
    const detail::Scenario* s = detail::find_scenario(c.scenario);
    if (!s) error("unknown scenario '" + c.scenario + "'");
    const int depth = resolved_depth(c, s);
    if (depth < 1 || depth > kDefaultDepthCap) {
        error("depth " + std::to_string(depth) + " outside [1, " + std::to_string(kDefaultDepthCap) + "] (depth cap)");
    }
    if (c.shifted != 0 && c.shifted != 2 && c.shifted != 3) error("systems must be standard, shifted2 or shifted3");
    if (c.points < 1 || c.points > 4096) error("points must lie in [1, 4096]");
    if (c.epsilon && !(*c.epsilon > 0.0)) error("epsilon must be positive");
    if (!s) return d;
    bool specs_ok = true;
    for (const MeasureSpec& spec : {c.mu ? *c.mu : s->mu, c.nu ? *c.nu : s->nu}) {
        try {
            validate(spec);
        } catch (const Error& e) {
            specs_ok = false;
            error(std::string("invalid measure spec: ") + e.what());
        }
    }
    if (specs_ok && depth >= 1 && depth <= kDefaultDepthCap) {
        const Measure mu = generate(c.mu ? *c.mu : s->mu);
        const std::vector<double> hits = mu.boundary_atoms(depth);
        if (!hits.empty()) {
            std::string m = "mu has atoms on dyadic boundaries (first at " + std::to_string(hits.front()) +
                            "); the square-function theorem assumes mu does not charge the boundaries of dyadic "
                            "intervals";
            d.push_back({Diagnostic::Level::warning, m});
        }
    }
    return d;
}

Report run(const ExperimentConfig& c) {
    std::string errors;
    for (const Diagnostic& d : validate(c)) {
        if (d.level == Diagnostic::Level::error) errors += (errors.empty() ? "" : "; ") + d.message;
    }
    if (!errors.empty()) throw UsageError(errors);
    const detail::Scenario& s = *detail::find_scenario(c.scenario);
    Report r;
    r.scenario = s.info.name;
    r.hash = config_hash(c);
    const Measure mu = generate(c.mu ? *c.mu : s.mu);
    const Measure nu = generate(c.nu ? *c.nu : s.nu);
    detail::Context ctx{c, mu, nu, resolved_depth(c, &s), r};
    r.measurements["depth"] = ctx.depth;
    for (const Diagnostic& d : validate(c)) r.warnings.push_back(d.message);
    AlphaTable table(mu, nu);
    detail::common_suite(ctx, table);
    if (s.suite) s.suite(ctx, table);
    if (c.shifted > 0) {
        for (const DyadicSystem& sys : shifted_systems(c.shifted)) {
            AlphaTable st(mu, nu, sys);
            const std::vector<double> pts = sample_points(mu, std::min(ctx.depth, 16), c.points, c.seed);
            const SquareFunctionProfile p = dyadic_square_profile(st, pts, std::min(ctx.depth, 16));
            r.measurements["shifted_profiles"]["system" + std::to_string(sys.id())] = p.to_json();
        }
    }
    return r;
}

int exit_code(const Report& r) { return r.passed() ? 0 : 1; }

}  // namespace sqfn
