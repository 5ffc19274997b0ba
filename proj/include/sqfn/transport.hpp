#pragma once

#include <optional>
#include <vector>

#include "sqfn/measure.hpp"

namespace sqfn {

// G = F1 - F2 is linear on (x0, x1) with right limit g0 at x0 and left limit
// g1 at x1; jumps sit between consecutive segments.
struct CdfSegment {
    double x0 = 0.0;
    double x1 = 0.0;
    double g0 = 0.0;
    double g1 = 0.0;
};

class CdfDifference {
public:
    CdfDifference() = default;
    explicit CdfDifference(std::vector<CdfSegment> segments) : segments_(std::move(segments)) {}

    const std::vector<CdfSegment>& segments() const { return segments_; }
    // Right-continuous value for x in [0, 1).
    double operator()(double x) const;
    // Integral of |G - c| over [0, 1].
    double l1_distance(double c) const;
    // Midpoint of the set of minimizers of c -> l1_distance(c).
    double median() const;

private:
    std::vector<CdfSegment> segments_;
};

// Atoms at 1 are left out; atoms at 0 are counted from 0 on.
CdfDifference cdf_difference(const Measure& m1, const Measure& m2);

struct W1Result {
    double value = 0.0;
    double optimal_shift = 0.0;
    std::optional<PiecewiseLinearFn> witness;
};

// sup |int psi d(m1 - m2)| over 1-Lipschitz psi vanishing outside [0,1].
W1Result w1_supported(const Measure& m1, const Measure& m2, bool with_witness = false);
// Same sup without the support constraint; needs equal total masses.
double w1_unrestricted(const Measure& m1, const Measure& m2);
// Exact LP value over grid_n-cell piecewise-linear test functions; a lower
// bound for w1_supported computed from hat-function integrals only.
double w1_oracle(const Measure& m1, const Measure& m2, int grid_n);

}  // namespace sqfn
