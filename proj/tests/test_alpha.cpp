#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "sqfn/alpha.hpp"
#include "sqfn/transport.hpp"

using namespace sqfn;

namespace {

const Window kWide{-1.0, 1.0, Extension::zero};

}  // namespace

TEST_CASE("alpha examples") {
    const Measure leb = Measure::lebesgue();
    CHECK(alpha(leb, leb, DyadicInterval{0, 4, 3}) == 0.0);
    for (int n = 3; n <= 12; ++n) {
        CHECK(alpha(generate(Example22Spec{n}), leb, DyadicInterval{}) ==
              doctest::Approx(std::ldexp(1.0, -2 * n - 1)).epsilon(1e-12));
    }
    for (int n = 4; n <= 10; n += 2) {
        const double a = alpha(generate(Example52Spec{n}), leb, Window{0.0, 0.5, Extension::zero});
        const double expect = std::ldexp(1.0, -n - 2);
        CHECK(a >= expect / 2);
        CHECK(a <= expect * 2);
    }
    // A side of zero mass is the zero measure.
    CHECK(alpha(Measure::dirac(0.9), leb, DyadicInterval{0, 1, 0}) == doctest::Approx(0.25));
}

TEST_CASE("smooth alpha examples") {
    const Measure leb = Measure::lebesgue();
    CHECK(alpha_smooth(leb, leb, Window{0.25, 0.5, Extension::zero}).value == 0.0);

    const double e = 0.01;
    const Measure mu = generate(Example53Spec{e, Example53Side::mu});
    const Measure nu = generate(Example53Spec{e, Example53Side::nu});
    const SmoothAlpha half = alpha_smooth(mu, nu, Window{0.0, 0.5, Extension::zero});
    CHECK(half.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(half.one_sided_null);
    const SmoothAlpha wide = alpha_smooth(mu, nu, kWide);
    CHECK(!wide.one_sided_null);
    // Oracle on the tent-normalized blow-ups.
    const PiecewiseLinearFn tent = PiecewiseLinearFn::tent();
    const Measure mb = mu.blowup(kWide), nb = nu.blowup(kWide);
    const double o = w1_oracle(mb.scaled(1 / mb.integrate(tent)), nb.scaled(1 / nb.integrate(tent)), 1 << 14);
    CHECK(std::abs(wide.value - o) <= 1e-3);
    // alpha_s ~ 4 eps on [-1,1): the mass defect eps/(1/4) meets psi(3/4) = 1/4.
    for (double eps : {0.005, 0.01, 0.02}) {
        const double v = alpha_smooth(generate(Example53Spec{eps, Example53Side::mu}),
                                      generate(Example53Spec{eps, Example53Side::nu}), kWide)
                             .value;
        CHECK(v >= 4 * eps / 3);
        CHECK(v <= 4 * eps * 3);
    }
}

TEST_CASE("smooth bounds examples") {
    const Measure leb = Measure::lebesgue();
    const Window unit{0.0, 1.0, Extension::zero};
    const SmoothBoundsReport same = smooth_bounds_check(leb, leb, unit);
    CHECK(same.alpha_s == 0.0);
    CHECK(same.absolute_bound == 2.0);
    CHECK(same.alpha_bound == 0.0);
    CHECK(same.holds);

    const SmoothBoundsReport e22 = smooth_bounds_check(generate(Example22Spec{4}), leb, unit);
    CHECK(e22.nu_i_phi == doctest::Approx(0.25));
    CHECK(e22.alpha_bound == doctest::Approx(8 * e22.alpha));
    CHECK(e22.holds);

    const SmoothBoundsReport e53 = smooth_bounds_check(generate(Example53Spec{0.1, Example53Side::mu}),
                                                       generate(Example53Spec{0.1, Example53Side::nu}), unit);
    CHECK(e53.alpha_s <= 2.0);
    CHECK(e53.holds);
}

TEST_CASE("stability examples") {
    const Measure leb = Measure::lebesgue();
    const Measure c = generate(CascadeSpec{0.7, 12, {}});
    const Window j{0.25, 0.5, Extension::zero};
    const StabilityReport self = stability_check(c, leb, j, j, 1.0);
    CHECK(self.smooth_ratio == doctest::Approx(1.0));
    CHECK(self.bound >= self.alpha_s_inner);
    CHECK(self.holds);
    CHECK_THROWS_AS(stability_check(c, leb, j, j, 0.0), ParameterError);

    // Plain alpha loses any fixed ratio as n grows, smooth alpha does not.
    double last = 0.0;
    for (int n = 4; n <= 10; n += 2) {
        const StabilityReport s =
            stability_check(generate(Example52Spec{n}), leb, Window{0.0, 0.5, Extension::zero}, kWide, 0.25);
        CHECK(s.holds);
        CHECK(s.plain_ratio > 2 * last);
        last = s.plain_ratio;
    }
}

TEST_CASE("property: stability on nested cascade pairs") {
    const Measure leb = Measure::lebesgue();
    const Measure c = generate(CascadeSpec{0.7, 14, {}});
    gen::Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        const int lj = gen::integer(rng, 0, 8);
        const DyadicInterval j{0, lj, gen::integer(rng, 0, (1 << lj) - 1)};
        const DyadicInterval i{0, lj + 2, 4 * j.index + gen::integer(rng, 0, 3)};
        const StabilityReport s = stability_check(c, leb, Window{i.left(), i.right(), Extension::zero},
                                                  Window{j.left(), j.right(), Extension::zero}, 0.25);
        CHECK(s.holds);
        CHECK(s.slack >= -1e-9);
    }
}

TEST_CASE("property: alpha invariants") {
    gen::Rng rng(32);
    for (int trial = 0; trial < 200; ++trial) {
        const Measure a = gen::mixed(rng, 5, 4);
        const Measure b = gen::histogram(rng, 5);
        const int l = gen::integer(rng, 0, 4);
        const DyadicInterval i{0, l, gen::integer(rng, 0, (1 << l) - 1)};
        const Window w{i.left(), i.right(), Extension::zero};
        const double v = alpha(a, b, i);
        CHECK(v <= 0.5 + 1e-12);
        CHECK(v == doctest::Approx(alpha(b, a, i)).epsilon(1e-12));
        // Blowing everything up to [0,1) first changes nothing.
        CHECK(v == doctest::Approx(alpha(a.blowup(w), b.blowup(w), DyadicInterval{})).epsilon(1e-9));
        if (b.integrate(PiecewiseLinearFn::tent(w.left, w.right)) > 0.0) {
            const SmoothBoundsReport r = smooth_bounds_check(a, b, w);
            CHECK(r.alpha_s <= 2.0 + 1e-9);
            CHECK(r.holds);
        }
    }
}

TEST_CASE("epsilon_for_doubling examples") {
    const DecayConstants two = epsilon_for_doubling(2.0);
    CHECK(two.epsilon == doctest::Approx(1.0 / 128));
    CHECK(two.c == doctest::Approx(16.0));
    const DecayConstants one = epsilon_for_doubling(1.0);
    CHECK(one.epsilon == doctest::Approx(1.0 / 16));
    CHECK(one.c == doctest::Approx(2.0));
}

TEST_CASE("property: small alpha forces comparable children") {
    gen::Rng rng(33);
    int tested = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        // nu with cell masses in [1, 2] at depth 4, mu a small perturbation.
        const Measure nu = gen::histogram(rng, 4, 1.0, 2.0);
        const double d = doubling_constant(nu, DyadicSystem::standard(), 4).constant;
        const DecayConstants k = epsilon_for_doubling(d);
        const Measure mu = nu + gen::atoms(rng, 2).scaled(gen::uniform(rng, 0.0, 2 * k.epsilon));
        const int l = gen::integer(rng, 0, 3);
        const DyadicInterval i{0, l, gen::integer(rng, 0, (1 << l) - 1)};
        if (alpha(mu, nu, i) >= k.epsilon) continue;
        ++tested;
        const double m = mu.mass(i.left(), i.right());
        CHECK(m <= k.c * std::min(mu.mass(left_child(i).left(), left_child(i).right()),
                                  mu.mass(right_child(i).left(), right_child(i).right())));
    }
    CHECK(tested > 100);
}

TEST_CASE("ball selection") {
    const auto [lo, hi] = ball_band(6, 4);
    CHECK(lo == doctest::Approx(1.1 * std::ldexp(1.0, -3)));
    CHECK(hi == doctest::Approx(0.9 * std::ldexp(1.0, -2)));

    const Measure leb = Measure::lebesgue();
    const BallChoice flat = select_ball(leb, leb, DyadicInterval{0, 3, 2});
    CHECK(flat.alpha_s == 0.0);
    CHECK(flat.candidates > 0);

    const Measure c = generate(CascadeSpec{0.7, 16, {}});
    AlphaTable table(c, leb);
    for (int k = 0; k < 64; k += 9) {
        const DyadicInterval i{0, 6, k};
        const Ball b = table.ball(i).ball;
        const Ball p = table.ball(parent(i)).ball;
        CHECK(b.center - b.radius <= i.left() - i.length() / 4);
        CHECK(b.center + b.radius >= i.right() + i.length() / 4);
        CHECK(b.radius >= lo);
        CHECK(b.radius <= hi);
        CHECK(p.contains(b));
    }

    const Measure atoms({{0.1, 1.0}, {0.2, 1.0}}, {});
    const BallChoice ac = select_ball(atoms, leb, DyadicInterval{0, 1, 0}, BallParams{4, 1});
    CHECK(ac.candidates == 3);  // two atoms and one grid cell
    CHECK_THROWS_AS(select_ball(atoms, leb, DyadicInterval{0, 1, 1}), SupportError);
}

TEST_CASE("alpha table memoizes") {
    const Measure leb = Measure::lebesgue();
    const Measure c = generate(CascadeSpec{0.7, 10, {}});
    AlphaTable t(c, leb);
    const double a = t.alpha(DyadicInterval{0, 2, 1});
    CHECK(t.alpha(DyadicInterval{0, 2, 1}) == a);
    CHECK(a == alpha(c, leb, DyadicInterval{0, 2, 1}));
    CHECK(t.size() >= 1);
    CHECK(t.delta(DyadicInterval{0, 2, 1}) == doctest::Approx(0.2));
}
