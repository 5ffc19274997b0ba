#include "sqfn/whitney.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace sqfn {

WhitneyPartition::WhitneyPartition(double tau, int terms) : tau_(tau), terms_(terms) {
    if (!(tau > 0.0 && tau < 0.125)) throw ParameterError("Whitney parameter tau must lie in (0, 1/8)");
    if (terms < 1 || terms > 200) throw ParameterError("Whitney terms must lie in [1, 200]");
    fns_.resize(static_cast<std::size_t>(2 * terms + 1));
    for (int k = 1; k <= terms; ++k) {
        const double t = std::ldexp(tau, -k);
        fns_[static_cast<std::size_t>(terms - k)] = PiecewiseLinearFn::trapezoid(0.75 * t, 1.25 * t, 1.5 * t, 2.5 * t);
        fns_[static_cast<std::size_t>(terms + k)] =
            PiecewiseLinearFn::trapezoid(0.5 - 2.5 * t, 0.5 - 1.5 * t, 0.5 - 1.25 * t, 0.5 - 0.75 * t);
    }
    fns_[static_cast<std::size_t>(terms)] =
        PiecewiseLinearFn::trapezoid(0.75 * tau, 1.25 * tau, 0.5 - 1.25 * tau, 0.5 - 0.75 * tau);
    half_zero_ = fns_[static_cast<std::size_t>(terms)].scaled(0.5);
}

WhitneyPartition whitney_partition(double tau, int terms) { return WhitneyPartition(tau, terms); }

const PiecewiseLinearFn& WhitneyPartition::psi(int k) const {
    if (k < -terms_ || k > terms_) throw RangeError("Whitney index out of range");
    return fns_[static_cast<std::size_t>(k + terms_)];
}

double WhitneyPartition::sum(double x) const {
    double s = 0.0;
    for (const PiecewiseLinearFn& f : fns_) s += f(x);
    return s;
}

double WhitneyPartition::lipschitz_bound(int k) const { return kLipschitzC * std::ldexp(1.0, std::abs(k)) / tau_; }

const PiecewiseLinearFn& WhitneyPartition::series_term(Series s, int j) const {
    if (j == 0) return half_zero_;
    return psi(s == Series::minus ? -j : j);
}

Window series_chain(Series s, int j) {
    if (s == Series::minus || j == 0) return Window{0.0, std::ldexp(1.0, -j)};
    return Window{0.5 - std::ldexp(1.0, -j), 0.5};
}

RepresentationTerms representation_check(const Measure& mu, const Measure& nu, const WhitneyPartition& w,
                                         Series s, int n, const DyadicInterval& i) {
    const int kmax = w.terms() - 1;
    if (n == kInfinite) n = kmax;
    if (n < 0 || n > kmax) throw ParameterError("representation_check needs 0 <= N < Whitney terms");
    RepresentationTerms r;
    const double mi = mu.mass(i.left(), i.right());
    if (!(nu.mass(i.left(), i.right()) > 0.0)) throw PreconditionError("nu vanishes on " + i.to_string());
    if (mi == 0.0) {
        r.holds = true;
        return r;
    }
    const Measure mb = mu.blowup(i.left(), i.right()).normalized();
    const Measure nb = nu.blowup(i.left(), i.right()).normalized();
    const int k_terms = w.terms() + 1;  // j = 0..terms
    std::vector<double> tail_mu(static_cast<std::size_t>(k_terms) + 1, 0.0);
    std::vector<double> tail_nu(static_cast<std::size_t>(k_terms) + 1, 0.0);
    for (int j = k_terms - 1; j >= 0; --j) {
        const PiecewiseLinearFn& f = w.series_term(s, j);
        tail_mu[static_cast<std::size_t>(j)] = tail_mu[static_cast<std::size_t>(j) + 1] + mb.integrate(f);
        tail_nu[static_cast<std::size_t>(j)] = tail_nu[static_cast<std::size_t>(j) + 1] + nb.integrate(f);
    }
    r.lhs = std::abs(tail_mu[0] - tail_nu[0]) * mi;
    for (int k = 0; k <= n; ++k) {
        const Window jk = series_chain(s, k);
        const Window jn = series_chain(s, k + 1);
        const double muk = mb.mass(jk);
        const double nuk = nb.mass(jk);
        const double nun = nb.mass(jn);
        const double lf = w.series_term(s, k).lipschitz() * jk.length();
        double tf = 0.0;
        const double tn = tail_nu[static_cast<std::size_t>(k) + 1];
        if (nun > 0.0) tf = tn / nun;
        else if (tn > 0.0) throw PreconditionError("nu vanishes on a chain interval carrying test mass");
        double a = 0.0;
        double d = 0.0;
        if (muk > 0.0) {
            a = alpha(mb, nb, jk);
            if (nuk > 0.0) d = std::abs(mb.mass(jn) / muk - nun / nuk);
        }
        r.lipschitz_factor.push_back(lf);
        r.tail_factor.push_back(tf);
        r.alpha.push_back(a);
        r.delta.push_back(d);
        r.mu.push_back(muk * mi);
        r.alpha_terms += lf * a * muk * mi;
        r.delta_terms += tf * d * muk * mi;
    }
    r.tip = 2.0 * mb.mass(series_chain(s, n + 1)) * mi;
    r.rhs = r.alpha_terms + r.delta_terms + r.tip;
    r.slack = r.rhs - r.lhs;
    r.holds = r.slack >= -1e-9;
    return r;
}

TailTipCheck tailtip_check(const Measure& mu, const Measure& nu, const DyadicInterval& i, double tau, int n1,
                           int n2, int terms) {
    TailTipCheck c;
    const WhitneyPartition w(tau, terms);
    // Chain intervals must stay within kMaxLevel.
    const int kmax = std::min(terms - 1, kMaxLevel - 1 - i.level);
    if (kmax < 1) throw ParameterError("interval too deep for a Tail-Tip check");
    c.sets = tail_tip(i, n1, n2, i.level + kmax);
    auto cap = [&](int n) {
        if (n == kInfinite) return kmax;
        if (n > kmax) throw ParameterError("Tail chain longer than the Whitney partition; raise terms");
        return n;
    };
    const bool degenerate = n2 == -1;
    const int nm = degenerate ? 0 : cap(n1);
    const int np = degenerate ? 0 : cap(n2 == kInfinite ? kInfinite : n2 + 1);
    const RepresentationTerms rm = representation_check(mu, nu, w, Series::minus, nm, i);
    const RepresentationTerms rp = representation_check(mu, nu, w, Series::plus, np, i);
    c.chain_rhs = rm.rhs + rp.rhs;
    c.lhs = delta(mu, nu, i) * mu.mass(i.left(), i.right());

    // Chain index -> dyadic interval of I, to merge terms of shared intervals.
    struct Entry {
        double alpha_mu = 0.0;
        double delta_mu = 0.0;
        double kappa = 0.0;
    };
    std::map<std::uint64_t, Entry> entries;
    auto add = [&](const DyadicInterval& j, const RepresentationTerms& r, std::size_t k) {
        Entry& e = entries[j.key()];
        e.alpha_mu = r.alpha[k] * r.mu[k];
        e.delta_mu = r.delta[k] * r.mu[k];
        e.kappa += r.tail_factor[k];
    };
    if (!rm.mu.empty()) {
        for (std::size_t k = 0; k < rm.mu.size(); ++k) add(minus_chain(i, static_cast<int>(k)), rm, k);
        for (std::size_t k = 0; k < rp.mu.size(); ++k) {
            add(k == 0 ? i : plus_chain(left_child(i), static_cast<int>(k) - 1), rp, k);
        }
    }
    for (const auto& [key, e] : entries) {
        c.alpha_sum += e.alpha_mu;
        c.delta_sum += e.delta_mu;
        c.kappa = std::max(c.kappa, e.kappa);
    }
    c.tip = rm.tip + rp.tip;  // 2 mu(Tip), or 4 mu(I_-) when degenerate
    c.rhs = c.constant / tau * c.alpha_sum + c.kappa * c.delta_sum + c.tip;
    c.slack = c.rhs - c.lhs;
    c.holds = c.slack >= -1e-9 && c.lhs <= c.chain_rhs + 1e-9;
    return c;
}

std::pair<int, int> tree_tail_indices(const Tree& tree, const DyadicInterval& i) {
    if (!tree.is_interior(i)) throw DomainError(i.to_string() + " is not an interior tree member");
    if (tree.is_leaf(left_child(i))) return {0, -1};
    int n1 = kInfinite;
    for (int k = 1; i.level + k <= tree.max_level(); ++k) {
        if (tree.is_leaf(minus_chain(i, k))) {
            n1 = k - 1;
            break;
        }
    }
    int n2 = kInfinite;
    const DyadicInterval im = left_child(i);
    for (int k = 1; im.level + k <= tree.max_level(); ++k) {
        if (tree.is_leaf(plus_chain(im, k))) {
            n2 = k - 1;
            break;
        }
    }
    return {n1, n2};
}

double tail_factor(const Measure& nu, double tau, int depth, int kmax) {
    if (depth < 0 || depth > 16) throw ParameterError("tail_factor depth must lie in [0, 16]");
    double worst = 0.0;
    for (int j = 0; j <= depth; ++j) {
        for (std::int64_t idx = 0; idx < (std::int64_t{1} << j); ++idx) {
            const double a = std::ldexp(static_cast<double>(idx), -j);
            const double len = std::ldexp(1.0, -j);
            if (!(nu.mass(a, a + len) > 0.0)) continue;
            for (int k = 0; k <= kmax; ++k) {
                const double reach = 2.0 * tau * std::ldexp(1.0, -k) * len;
                const double lm = nu.mass(a, a + std::ldexp(len, -(k + 1)));
                if (lm > 0.0) worst = std::max(worst, nu.mass(a, a + reach) / lm);
                const double mid = a + 0.5 * len;
                const double rm = nu.mass(mid - std::ldexp(len, -(k + 1)), mid);
                if (rm > 0.0) worst = std::max(worst, nu.mass(mid - reach, mid) / rm);
            }
        }
    }
    return worst;
}

double calibrate_tau(const Measure& nu, double kappa, int depth, int kmax) {
    if (!(kappa > 0.0)) throw ParameterError("kappa must be positive");
    double tau = 1.0 / 16.0;
    while (tau > 1e-9 && tail_factor(nu, tau, depth, kmax) > kappa) tau *= 0.5;
    return tau;
}

CarlesonComparison carleson_comparison(AlphaTable& table, const Tree& tree, double d) {
    const Measure& mu = table.mu();
    const TreeDoublingReport rep = tree_doubling_check(mu, tree, d);
    if (!rep.passes) {
        throw PreconditionError("mu is not (T," + std::to_string(d) + ")-doubling: ratio " +
                                std::to_string(rep.worst_ratio) + " at " + rep.worst.to_string());
    }
    CarlesonComparison c;
    c.doubling = rep.worst_ratio;
    c.top_mass = mu.mass(tree.top().left(), tree.top().right());
    if (c.top_mass == 0.0) return c;
    tree.for_each_member([&](const DyadicInterval& i) {
        const double m = mu.mass(i.left(), i.right());
        if (m == 0.0) return;
        const double dl = table.delta(i);
        c.sum_delta += dl * dl * m;
        if (!tree.is_leaf(i)) {
            const double a = table.alpha(i);
            c.sum_alpha += a * a * m;
        }
    });
    c.ratio = c.sum_delta / (c.sum_alpha + c.top_mass);
    return c;
}

}  // namespace sqfn
