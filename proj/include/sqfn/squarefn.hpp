#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqfn/alpha.hpp"
#include "sqfn/dyadic.hpp"
#include "sqfn/measure.hpp"

namespace sqfn {

// Worker count from SQFNLAB_THREADS, else the hardware concurrency (>= 1).
int worker_threads();

struct SquareFunctionProfile {
    enum class Mode { dyadic, continuous };
    Mode mode = Mode::dyadic;
    std::vector<double> points;
    // Dyadic: scale m is level m. Continuous: scale m is r = 2^-m and the
    // entry is the integral over [2^-m, 1].
    std::vector<double> scales;
    std::vector<std::vector<double>> partial_sums;  // [point][scale]
    std::vector<double> boundary_points;            // points on a used dyadic boundary
    int nodes_per_octave = 0;                       // continuous mode, after refinement

    // Partial sums averaged over points.
    std::vector<double> mean() const;
    nlohmann::json to_json() const;
    std::string to_csv() const;
};

// Points drawn proportionally to mu cell masses at `depth`; each is the
// center of its cell.
std::vector<double> sample_points(const Measure& mu, int depth, int count, std::uint64_t seed);

SquareFunctionProfile dyadic_square_profile(AlphaTable& table, const std::vector<double>& points, int depth);

// Trapezoid rule in log r over [r_min, 1]. The node count per octave doubles
// (up to 64) until the total moves by less than 1%.
SquareFunctionProfile continuous_square_profile(const Measure& mu, const Measure& nu,
                                                const std::vector<double>& points, double r_min,
                                                int pts_per_octave = 4);

// Least-squares slope of the mean partial sum over scales [from, to].
double profile_slope(const SquareFunctionProfile& p, int from, int to);

enum class Coefficient { alpha, delta };

// Sum of c(I)^2 mu(I) over standard I inside J with level < depth.
double carleson_sum(AlphaTable& table, const DyadicInterval& j, Coefficient which, int depth);
// Largest carleson_sum(J) / mu(J) over J with level <= depth / 2 and mu(J) > 0.
double buckley_ratio(AlphaTable& table, Coefficient which, int depth);

// Density g on the cells of level `depth`, against some nu.
struct HistogramDensity {
    int depth = 0;
    std::vector<double> values;
};
// g dnu as a measure.
Measure density_measure(const HistogramDensity& g, const Measure& nu);

struct TolsaL2 {
    double lhs = 0.0;     // sum alpha^2(I) mu(I)^2 / nu(I), level <= depth
    double l2norm = 0.0;  // integral of g^2 dnu
    double ratio = 0.0;
};
TolsaL2 tolsa_l2(const HistogramDensity& g, const Measure& nu, const DyadicSystem& system, int depth);

struct BadPart {
    DyadicInterval interval;
    double mu_mass = 0.0;
    double nu_multiple = 0.0;  // mu(B) / nu(B)
};

struct CZDecomposition {
    double lambda = 0.0;
    std::vector<DyadicInterval> bad;
    Measure good;
    std::vector<BadPart> bad_parts;
    // Invariants measured on all cells of level <= depth.
    double reconstruction_error = 0.0;
    double max_bad_total = 0.0;  // largest |b_B(B)|
    double nu_bad = 0.0;         // nu of the union of bad intervals
    double good_density = 0.0;   // largest g(C)/nu(C) over cells of level depth
    double doubling = 0.0;       // D_nu up to depth
    bool holds = false;
    nlohmann::json to_json() const;
};
CZDecomposition cz_decompose(const Measure& mu, const Measure& nu, double lambda, int depth);

// Delta_J g takes the value child_average - average on each child of J.
struct MartingaleDifference {
    double average = 0.0;
    double left_average = 0.0;
    double right_average = 0.0;
};

class MartingaleDifferences {
public:
    // Differences for J inside i with level < i.level + depth.
    MartingaleDifferences(const HistogramDensity& g, const Measure& nu, const DyadicInterval& i, int depth);

    const DyadicInterval& top() const { return top_; }
    int depth() const { return depth_; }
    const std::map<DyadicInterval, MartingaleDifference>& table() const { return table_; }
    double average() const;
    // Delta_J g on the cell c (c inside a child of J), else 0.
    double value(const DyadicInterval& j, const DyadicInterval& c) const;
    // <g>_top plus every difference, evaluated on a cell of level top + depth.
    double reconstruct(const DyadicInterval& cell) const;
    // integral of Delta_J g Delta_K g dnu, and of Delta_J g dnu.
    double inner(const DyadicInterval& j, const DyadicInterval& k) const;
    double mean(const DyadicInterval& j) const;

private:
    const Measure* nu_;
    DyadicInterval top_;
    int depth_;
    std::map<DyadicInterval, MartingaleDifference> table_;
};

MartingaleDifferences martingale_diff(const HistogramDensity& g, const Measure& nu, const DyadicInterval& i,
                                      int depth);

struct DominationCheck {
    double x = 0.0;
    double r = 0.0;
    double alpha_s_sq = 0.0;  // alpha_s^2 of B(x, r)
    // Per covering system: covering interval, its alpha^2, the constant K and
    // K alpha^2. Systems whose root straddles B are skipped.
    std::vector<DyadicInterval> cover;
    std::vector<double> alpha_sq;
    std::vector<double> constant;
    std::vector<double> bound;
    double rhs = 0.0;  // max over systems of the bounds
    double slack = 0.0;
    bool holds = false;  // every covering system's bound dominates
};
// B(x, r) must lie in [0, 1).
DominationCheck domination_check(const Measure& mu, const Measure& nu, double x, double r,
                                 const std::vector<DyadicSystem>& systems);

}  // namespace sqfn
