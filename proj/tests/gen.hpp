#pragma once

// Hand-rolled generators for property tests.

#include <cmath>
#include <random>
#include <vector>

#include "sqfn/measure.hpp"

namespace gen {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double a = 0.0, double b = 1.0) {
    return std::uniform_real_distribution<double>(a, b)(rng);
}

inline int integer(Rng& rng, int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); }

// Atoms at centers of level-`level` cells, so they avoid coarser boundaries.
inline sqfn::Measure atoms(Rng& rng, int max_atoms, int level = 13) {
    std::vector<sqfn::Atom> a;
    const int n = integer(rng, 1, max_atoms);
    for (int i = 0; i < n; ++i) {
        a.push_back({std::ldexp(integer(rng, 0, (1 << level) - 1) + 0.5, -level), uniform(rng, 0.05, 1.0)});
    }
    return sqfn::Measure(a, {});
}

// Histogram with cell masses in [lo, hi], normalized to total 1.
inline sqfn::Measure histogram(Rng& rng, int depth, double lo = 0.5, double hi = 2.0) {
    std::vector<double> m(std::size_t{1} << depth);
    double t = 0.0;
    for (double& x : m) t += (x = uniform(rng, lo, hi));
    for (double& x : m) x /= t;
    return sqfn::Measure::histogram(depth, m);
}

// Histogram with possibly empty cells plus a few atoms.
inline sqfn::Measure mixed(Rng& rng, int depth, int max_atoms) {
    std::vector<double> m(std::size_t{1} << depth);
    for (double& x : m) x = uniform(rng) < 0.3 ? 0.0 : uniform(rng);
    const sqfn::Measure h = sqfn::Measure::histogram(depth, m);
    return h + atoms(rng, max_atoms);
}

inline std::vector<double> density(Rng& rng, int depth, double lo = 0.5, double hi = 2.0) {
    std::vector<double> g(std::size_t{1} << depth);
    for (double& x : g) x = uniform(rng, lo, hi);
    return g;
}

}  // namespace gen
