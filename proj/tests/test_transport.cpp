#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gen.hpp"
#include "sqfn/transport.hpp"

using namespace sqfn;

namespace {

// min over c of the integral of |G - c|, with G sampled at cell midpoints of a
// 2^16 grid straight from the atom list.
double brute_w1(const Measure& a, const Measure& b) {
    const int n = 1 << 16;
    std::vector<double> g(n, 0.0);
    auto add = [&](const Measure& m, double sign) {
        for (const Atom& x : m.atoms()) {
            if (x.position >= 1.0) continue;
            const int first = static_cast<int>(std::ceil(x.position * n - 0.5));
            for (int i = std::max(first, 0); i < n; ++i) g[static_cast<std::size_t>(i)] += sign * x.weight;
        }
    };
    add(a, 1.0);
    add(b, -1.0);
    std::vector<double> sorted = g;
    std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
    const double c = sorted[n / 2];
    double s = 0.0;
    for (double v : g) s += std::abs(v - c);
    return s / n;
}

}  // namespace

TEST_CASE("w1_supported examples") {
    CHECK(w1_supported(Measure::dirac(0.0), Measure::dirac(1.0)).value == 0.0);
    for (int n = 5; n <= 40; n += 7) {
        CHECK(w1_supported(Measure::dirac(0.5 - 1.0 / n), Measure::dirac(0.5 + 1.0 / n)).value ==
              doctest::Approx(2.0 / n).epsilon(1e-13));
    }
    const Measure e = generate(Example22Spec{3});
    CHECK(w1_supported(e, e).value == 0.0);
    CHECK(w1_supported(e, Measure::lebesgue()).value == doctest::Approx(std::ldexp(1.0, -7)).epsilon(1e-12));
}

TEST_CASE("w1_unrestricted examples") {
    CHECK(w1_unrestricted(Measure::dirac(0.0), Measure::dirac(1.0)) == 1.0);
    CHECK(w1_unrestricted(Measure::lebesgue(), Measure::lebesgue()) == 0.0);
    CHECK(w1_unrestricted(Measure::lebesgue(), Measure::dirac(0.5)) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK_THROWS_AS(w1_unrestricted(Measure::lebesgue(), Measure::dirac(0.5, 2.0)), DomainError);
}

TEST_CASE("cdf_difference examples") {
    const CdfDifference z = cdf_difference(Measure::lebesgue(), Measure::lebesgue());
    CHECK(z.l1_distance(0.0) == 0.0);
    const CdfDifference one = cdf_difference(Measure::dirac(0.0), Measure::dirac(1.0));
    CHECK(one(0.0) == 1.0);
    CHECK(one(0.999) == 1.0);
    const CdfDifference tent = cdf_difference(generate(Example22Spec{3}), Measure::lebesgue());
    CHECK(tent(0.2) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(tent(0.375) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(tent(0.5) == doctest::Approx(-1.0 / 16));
    CHECK(tent(0.4375) == doctest::Approx(-1.0 / 32));
    CHECK(tent(0.625) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(tent(0.8) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(tent.median() == 0.0);
}

TEST_CASE("w1_oracle examples") {
    CHECK(std::abs(w1_oracle(Measure::dirac(0.0), Measure::dirac(1.0), 128)) <= 1.0 / 128);
    const double o = w1_oracle(generate(Example22Spec{3}), Measure::lebesgue(), 4096);
    CHECK(std::abs(o - std::ldexp(1.0, -7)) <= 1e-3 * std::ldexp(1.0, -7));
    gen::Rng rng(9);
    const Measure m = gen::mixed(rng, 4, 5);
    CHECK(std::abs(w1_oracle(m, m, 256)) < 1e-14);
}

TEST_CASE("property: closed form agrees with the grid oracle and the brute force") {
    gen::Rng rng(11);
    for (int trial = 0; trial < 60; ++trial) {
        const Measure a = gen::atoms(rng, 16);
        const Measure b = gen::atoms(rng, 16);
        const double w = w1_supported(a, b).value;
        CHECK(std::abs(w - w1_oracle(a, b, 1 << 14)) <= std::ldexp(1.0, -12));
        CHECK(std::abs(w - brute_w1(a, b)) <= 1e-4);
    }
}

TEST_CASE("property: oracle is a lower bound on mixed measures") {
    gen::Rng rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        const Measure a = gen::mixed(rng, 4, 4);
        const Measure b = gen::histogram(rng, 5);
        const double w = w1_supported(a, b).value;
        const double o = w1_oracle(a, b, 1 << 12);
        CHECK(o <= w + 1e-12);
        CHECK(w - o <= 4.0 / (1 << 12));
    }
}

TEST_CASE("property: witness is admissible and attains the value") {
    gen::Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const Measure a = trial % 2 ? gen::mixed(rng, 3, 4) : gen::atoms(rng, 8);
        const Measure b = gen::mixed(rng, 4, 3);
        const W1Result r = w1_supported(a, b, true);
        REQUIRE(r.witness.has_value());
        const PiecewiseLinearFn& psi = *r.witness;
        CHECK(psi.lipschitz() <= 1.0 + 1e-9);
        CHECK(std::abs(psi(0.0)) < 1e-12);
        CHECK(std::abs(psi(1.0)) < 1e-12);
        CHECK(a.integrate(psi) - b.integrate(psi) == doctest::Approx(r.value).epsilon(1e-9));
    }
}

TEST_CASE("property: W1 is a pseudo-metric bounded by the unrestricted distance") {
    gen::Rng rng(14);
    for (int trial = 0; trial < 100; ++trial) {
        const Measure a = gen::histogram(rng, 3).scaled(1.0);
        const Measure b = gen::atoms(rng, 6).normalized();
        const Measure c = gen::mixed(rng, 3, 2).normalized();
        const double ab = w1_supported(a, b).value;
        CHECK(ab == doctest::Approx(w1_supported(b, a).value).epsilon(1e-12));
        CHECK(ab <= w1_supported(a, c).value + w1_supported(c, b).value + 1e-12);
        CHECK(ab <= w1_unrestricted(a, b) + 1e-12);
    }
}
