#pragma once

#include <vector>

#include "sqfn/alpha.hpp"
#include "sqfn/dyadic.hpp"
#include "sqfn/measure.hpp"
#include "sqfn/tree.hpp"

namespace sqfn {

// Trapezoid partition of unity on (0, 1/2): psi_0 lives on [tau/2, 1/2 - tau/2),
// psi_{-k} ramps up over [0.75 t_k, 1.25 t_k] and down over [1.5 t_k, 2.5 t_k]
// with t_k = tau 2^-k, and psi_k(x) = psi_{-k}(1/2 - x). Terms with
// |k| > `terms` are dropped.
class WhitneyPartition {
public:
    static constexpr double kLipschitzC = 4.0;

    WhitneyPartition(double tau, int terms = 60);

    double tau() const { return tau_; }
    int terms() const { return terms_; }
    // k in [-terms, terms].
    const PiecewiseLinearFn& psi(int k) const;
    double sum(double x) const;
    double lipschitz_bound(int k) const;

    enum class Series { minus, plus };
    // Term j of Psi^- (psi_0/2, psi_{-1}, psi_{-2}, ...) or of Psi^+
    // (psi_0/2, psi_1, psi_2, ...).
    const PiecewiseLinearFn& series_term(Series s, int j) const;

private:
    double tau_;
    int terms_;
    std::vector<PiecewiseLinearFn> fns_;  // index k + terms
    PiecewiseLinearFn half_zero_;
};

WhitneyPartition whitney_partition(double tau, int terms = 60);

using Series = WhitneyPartition::Series;

// Interval carrying series term j: [0, 2^-j) for Psi^-; [0,1) and then
// [1/2 - 2^-j, 1/2) for Psi^+.
Window series_chain(Series s, int j);

struct RepresentationTerms {
    double lhs = 0.0;
    double alpha_terms = 0.0;
    double delta_terms = 0.0;
    double tip = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    bool holds = false;
    // Per chain index k: L_k/2^k, the nu-tail factor, alpha, Delta and mu(I_k).
    std::vector<double> lipschitz_factor;
    std::vector<double> tail_factor;
    std::vector<double> alpha;
    std::vector<double> delta;
    std::vector<double> mu;
};

// Both sides of the representation inequality for the Psi^- or Psi^+ series,
// applied to the normalized blow-ups on `i` and scaled back by mu(i).
RepresentationTerms representation_check(const Measure& mu, const Measure& nu, const WhitneyPartition& w,
                                         Series s, int n, const DyadicInterval& i = {});

struct TailTipCheck {
    double lhs = 0.0;        // Delta(I) mu(I)
    double alpha_sum = 0.0;  // sum over Tail of alpha mu
    double delta_sum = 0.0;  // sum over Tail of Delta mu
    double kappa = 0.0;      // largest summed nu-tail factor over Tail
    double tip = 0.0;        // 2 mu(Tip) (4 mu(I_-) in the degenerate case)
    double constant = WhitneyPartition::kLipschitzC;
    double rhs = 0.0;
    double chain_rhs = 0.0;  // sum of the two representation right-hand sides
    double slack = 0.0;
    bool holds = false;
    TailTip sets;
};

TailTipCheck tailtip_check(const Measure& mu, const Measure& nu, const DyadicInterval& i, double tau, int n1,
                           int n2, int terms = 60);

// (N1, N2) read off the tree; chains that reach
// max_level without meeting a leaf are infinite.
std::pair<int, int> tree_tail_indices(const Tree& tree, const DyadicInterval& i);

// Largest nu((0, 2 tau 2^-k) in I) / nu(I_{(k+1)-}) over intervals of level
// <= depth and k <= kmax, mirrored for the plus side.
double tail_factor(const Measure& nu, double tau, int depth, int kmax = 20);
// Halves tau from 1/16 until tail_factor <= kappa.
double calibrate_tau(const Measure& nu, double kappa, int depth, int kmax = 20);

struct CarlesonComparison {
    double sum_delta = 0.0;  // over all members
    double sum_alpha = 0.0;  // over members that are not leaves
    double top_mass = 0.0;
    double ratio = 0.0;
    double doubling = 0.0;  // measured (T, D) constant
};
// Fails with PreconditionError unless mu is (T, d)-doubling.
CarlesonComparison carleson_comparison(AlphaTable& table, const Tree& tree, double d);

}  // namespace sqfn
