#include <algorithm>
#include <cmath>
#include <random>

#include "scenario_registry.hpp"
#include "sqfn/squarefn.hpp"
#include "sqfn/transport.hpp"

namespace sqfn::detail {

namespace {

// Histogram masses of a density in [1/2, 2] with total mass 1.
HistogramSpec random_density(int depth, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> v(0.6, 1.6);
    std::vector<double> g(std::size_t{1} << depth);
    for (double& x : g) x = v(rng);
    double mean = 0.0;
    for (double x : g) mean += x;
    mean /= static_cast<double>(g.size());
    HistogramSpec h;
    h.depth = depth;
    for (double x : g) h.masses.push_back(std::ldexp(x / mean, -depth));
    return h;
}

HistogramDensity density_of(const HistogramSpec& h) {
    HistogramDensity g;
    g.depth = h.depth;
    for (double m : h.masses) g.values.push_back(std::ldexp(m, h.depth));
    return g;
}

CascadeSpec finite_haar() {
    CascadeSpec c;
    c.p = 0.5;
    c.depth = 6;
    c.fractions = {{{0, 0}, 0.6}, {{1, 1}, 0.45}, {{2, 1}, 0.55}, {{3, 5}, 0.4}, {{5, 17}, 0.6}};
    return c;
}

void identity_suite(Context& ctx, AlphaTable& table) {
    const auto& prof = ctx.report.measurements["profile"]["mean"];
    ctx.check("identity_profile_zero", prof.back().get<double>(), ctx.cfg.tol.exact);
    ctx.check("identity_buckley_alpha_zero", buckley_ratio(table, Coefficient::alpha, std::min(ctx.depth, 10)),
              ctx.cfg.tol.exact);
}

void cascade_suite(Context& ctx, AlphaTable& table) {
    const double cell = table.alpha(table.system().root());
    const double slope = ctx.report.measurements["profile_slope"].get<double>();
    ctx.report.measurements["alpha_cell_sq"] = cell * cell;
    ctx.check("profile_slope_matches_alpha_cell", std::abs(slope - cell * cell),
              ctx.cfg.tol.statistical * cell * cell);
    const int d = std::min(ctx.depth, 20);
    const double sum = carleson_sum(table, table.system().root(), Coefficient::delta, d);
    ctx.report.measurements["carleson_delta_at_depth"] = sum;
    ctx.check("delta_carleson_linear_growth", 0.03 * d, sum);
    ctx.check("classified_singular", ctx.report.classification == "singular" ? 0.0 : 1.0, 0.0);
}

void example22_suite(Context& ctx, AlphaTable& table) {
    const int n = std::get<Example22Spec>(ctx.cfg.mu ? *ctx.cfg.mu : find_scenario("example22")->mu).n;
    const DyadicInterval root{};
    ctx.check("example22_delta", std::abs(table.delta(root) - std::ldexp(1.0, -n - 1)), ctx.cfg.tol.exact);
    ctx.check("example22_alpha", std::abs(table.alpha(root) - std::ldexp(1.0, -2 * n - 1)), ctx.cfg.tol.exact);
}

void example52_suite(Context& ctx, AlphaTable&) {
    const StabilityReport s = stability_check(ctx.mu, ctx.nu, Window{0.0, 0.5}, Window{-1.0, 1.0}, 0.25);
    ctx.report.measurements["plain_ratio"] = num(s.plain_ratio);
    ctx.report.measurements["smooth_ratio"] = num(s.smooth_ratio);
    ctx.check("smooth_stability", s.alpha_s_inner, s.bound + ctx.cfg.tol.accumulation);
    double worst = INFINITY;
    for (int j = 0; j <= 6; ++j) {
        for (std::int64_t k = 0; k < (std::int64_t{1} << j); ++k) {
            const DyadicInterval i{0, j, k};
            worst = std::min(worst, smooth_bounds_check(ctx.mu, ctx.nu, Window{i.left(), i.right()}).slack);
        }
    }
    ctx.check("smooth_bounds", 0.0, worst + ctx.cfg.tol.accumulation);
}

void example53_suite(Context& ctx, AlphaTable&) {
    const SmoothAlpha big = alpha_smooth(ctx.mu, ctx.nu, Window{-1.0, 1.0});
    const SmoothAlpha small = alpha_smooth(ctx.mu, ctx.nu, Window{0.0, 0.5});
    ctx.report.measurements["alpha_s_wide"] = big.value;
    ctx.report.measurements["alpha_s_half"] = small.value;
    const SmoothBoundsReport b = smooth_bounds_check(ctx.mu, ctx.nu, Window{0.0, 1.0});
    ctx.check("smooth_bounds", b.alpha_s, std::min(b.absolute_bound, b.alpha_bound) + ctx.cfg.tol.accumulation);
}

void finite_haar_suite(Context& ctx, AlphaTable& table) {
    for (Coefficient which : {Coefficient::alpha, Coefficient::delta}) {
        const std::string tag = which == Coefficient::alpha ? "alpha" : "delta";
        std::vector<double> ratios;
        for (int d = 8; d <= 14; d += 2) ratios.push_back(buckley_ratio(table, which, d));
        ctx.report.measurements["buckley_" + tag] = ratios;
        ctx.check("buckley_" + tag + "_stable", std::abs(ratios.back() - ratios[1]), ctx.cfg.tol.accumulation);
    }
}

void fleet_suite(Context& ctx, AlphaTable&) {
    double worst_ratio = 0.0, drift = 0.0, recon = 0.0;
    bool cz_ok = true;
    for (int f = 0; f < 20; ++f) {
        const HistogramDensity g = density_of(random_density(8, ctx.cfg.seed * 1000 + f));
        const TolsaL2 t8 = tolsa_l2(g, ctx.nu, DyadicSystem::standard(), 8);
        const TolsaL2 t10 = tolsa_l2(g, ctx.nu, DyadicSystem::standard(), 10);
        worst_ratio = std::max(worst_ratio, t10.ratio);
        drift = std::max(drift, std::abs(t10.ratio - t8.ratio));
        const Measure mu = density_measure(g, ctx.nu);
        for (double lambda : {1.2, 1.5}) cz_ok = cz_ok && cz_decompose(mu, ctx.nu, lambda, 8).holds;
        const MartingaleDifferences md(g, ctx.nu, DyadicInterval{}, 8);
        for (std::int64_t k = 0; k < 256; ++k) {
            recon = std::max(recon, std::abs(md.reconstruct({0, 8, k}) - g.values[static_cast<std::size_t>(k)]));
        }
    }
    ctx.report.measurements["tolsa_max_ratio"] = worst_ratio;
    ctx.check("tolsa_depth_stable", drift, ctx.cfg.tol.accumulation);
    ctx.check("cz_fleet", cz_ok ? 0.0 : 1.0, 0.0);
    ctx.check("martingale_reconstruction", recon, ctx.cfg.tol.exact);
}

void oracle_suite(Context& ctx, AlphaTable&) {
    std::mt19937_64 rng(ctx.cfg.seed);
    std::uniform_int_distribution<int> count(1, 32);
    std::uniform_int_distribution<int> cell(0, (1 << 13) - 1);
    std::uniform_real_distribution<double> weight(0.0, 1.0);
    auto draw = [&] {
        std::vector<Atom> atoms;
        const int n = count(rng);
        for (int i = 0; i < n; ++i) atoms.push_back({std::ldexp(cell(rng) + 0.5, -13), weight(rng)});
        return Measure(atoms, {});
    };
    double worst = 0.0;
    for (int n = 0; n < 50; ++n) {
        const Measure a = draw();
        const Measure b = draw();
        worst = std::max(worst, std::abs(w1_supported(a, b).value - w1_oracle(a, b, 1 << 14)));
    }
    ctx.check("w1_oracle_agreement", worst, std::ldexp(1.0, -12));
    const Measure d0 = Measure::dirac(0.0);
    const Measure d1 = Measure::dirac(1.0);
    ctx.check("w1_supported_dirac", w1_supported(d0, d1).value, 0.0);
    ctx.check("w1_unrestricted_dirac", std::abs(w1_unrestricted(d0, d1) - 1.0), 0.0);
}

void ac_suite(Context& ctx, AlphaTable&) {
    const auto& m = ctx.report.measurements["profile"]["mean"];
    double tail = 0.0;
    for (std::size_t l = 13; l < m.size(); ++l) tail += m[l].get<double>() - m[l - 1].get<double>();
    ctx.check("profile_increments_past_12", tail, 1e-6);
    ctx.check("classified_absolutely_continuous", ctx.report.classification == "absolutely continuous" ? 0.0 : 1.0,
              0.0);
    std::vector<double> pts;
    for (const auto& x : ctx.report.measurements["profile"]["points"]) {
        if (pts.size() < 4) pts.push_back(x.get<double>());
    }
    const SquareFunctionProfile p = continuous_square_profile(ctx.mu, ctx.nu, pts, std::ldexp(1.0, -12));
    ctx.report.measurements["continuous_profile"] = p.to_json();
}

}  // namespace

const std::vector<Scenario>& scenarios() {
    static const std::vector<Scenario> all = [] {
        std::vector<Scenario> s;
        s.push_back({{"identity", "mu = nu = Lebesgue; every sum vanishes", 12}, LebesgueSpec{}, LebesgueSpec{}, {},
                     identity_suite});
        s.push_back({{"singular-cascade", "binomial cascade p = 0.7 against Lebesgue", 20},
                     CascadeSpec{0.7, 22, {}},
                     LebesgueSpec{},
                     {},
                     cascade_suite});
        s.push_back({{"cantor", "middle-thirds Cantor measure against Lebesgue", 14},
                     CantorSpec{1.0 / 3.0, 1.0 / 3.0, 14},
                     LebesgueSpec{},
                     {},
                     nullptr});
        s.push_back({{"example22", "Lebesgue with a 2^-n defect at 1/2; Delta ~ 2^-n, alpha ~ 2^-2n", 18},
                     Example22Spec{8},
                     LebesgueSpec{},
                     {},
                     example22_suite});
        s.push_back({{"example52", "plain alpha is unstable under enlargement, smooth alpha is not", 10},
                     Example52Spec{6},
                     LebesgueSpec{},
                     {},
                     example52_suite});
        s.push_back({{"example53", "atoms without doubling: smooth alpha degenerates", 8},
                     Example53Spec{1.0 / 16.0, Example53Side::mu},
                     Example53Spec{1.0 / 16.0, Example53Side::nu},
                     {},
                     example53_suite});
        s.push_back({{"finite-haar-A∞", "Lebesgue with five nonzero Haar coefficients", 14},
                     finite_haar(),
                     LebesgueSpec{},
                     {"finite-haar-Ainf"},
                     finite_haar_suite});
        s.push_back({{"random-histogram-fleet", "random densities in [1/2, 2]: Tolsa, CZ and martingale checks", 16},
                     random_density(8, 11),
                     LebesgueSpec{},
                     {},
                     fleet_suite});
        s.push_back({{"oracle-crossval", "closed-form W1 against the grid LP oracle", 8},
                     random_density(4, 5),
                     LebesgueSpec{},
                     {},
                     oracle_suite});
        s.push_back({{"ac-density", "histogram density in [1/2, 2] against Lebesgue", 16},
                     random_density(8, 7),
                     LebesgueSpec{},
                     {},
                     ac_suite});
        return s;
    }();
    return all;
}

const Scenario* find_scenario(const std::string& name) {
    for (const Scenario& s : scenarios()) {
        if (s.info.name == name) return &s;
        if (std::find(s.aliases.begin(), s.aliases.end(), name) != s.aliases.end()) return &s;
    }
    return nullptr;
}

}  // namespace sqfn::detail
