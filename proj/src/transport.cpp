#include "sqfn/transport.hpp"

#include <algorithm>
#include <cmath>

namespace sqfn {

double CdfDifference::operator()(double x) const {
    auto it = std::upper_bound(segments_.begin(), segments_.end(), x,
                               [](double v, const CdfSegment& s) { return v < s.x1; });
    if (it == segments_.end() || x < it->x0) return 0.0;
    if (it->x1 == it->x0) return it->g0;
    const double t = (x - it->x0) / (it->x1 - it->x0);
    return it->g0 + t * (it->g1 - it->g0);
}

namespace {

double segment_l1(const CdfSegment& s, double c) {
    const double len = s.x1 - s.x0;
    const double a = s.g0 - c;
    const double b = s.g1 - c;
    if ((a >= 0.0 && b >= 0.0) || (a <= 0.0 && b <= 0.0)) return len * std::abs(0.5 * (a + b));
    return len * (a * a + b * b) / (2.0 * std::abs(b - a));
}

struct ValueEvent {
    double value;
    double rate;  // change of dH/dc
    double jump;  // atom of the value distribution
};

// Smallest c with H(c) >= target (strict: H(c) > target), where H is the
// distribution function of G's values under Lebesgue measure on [0,1].
double reach(const std::vector<ValueEvent>& ev, double target, bool strict) {
    double h = 0.0;
    double slope = 0.0;
    std::size_t i = 0;
    auto hit = [&](double v) { return strict ? v > target : v >= target; };
    while (i < ev.size()) {
        const double v = ev[i].value;
        double jumps = 0.0;
        double dslope = 0.0;
        for (; i < ev.size() && ev[i].value == v; ++i) {
            jumps += ev[i].jump;
            dslope += ev[i].rate;
        }
        h += jumps;
        if (hit(h)) return v;
        slope += dslope;
        if (slope < 1e-300) slope = std::max(slope, 0.0);
        if (i < ev.size() && slope > 0.0) {
            const double next = ev[i].value;
            const double hn = h + slope * (next - v);
            if (hit(hn) && !(strict && hn == target)) {
                const double c = v + (target - h) / slope;
                return std::clamp(c, v, next);
            }
            h = hn;
        }
    }
    return ev.empty() ? 0.0 : ev.back().value;
}

}  // namespace

double CdfDifference::l1_distance(double c) const {
    double s = 0.0;
    for (const CdfSegment& seg : segments_) s += segment_l1(seg, c);
    return s;
}

double CdfDifference::median() const {
    std::vector<ValueEvent> ev;
    ev.reserve(2 * segments_.size());
    double total = 0.0;
    for (const CdfSegment& s : segments_) {
        const double len = s.x1 - s.x0;
        if (len <= 0.0) continue;
        total += len;
        const double lo = std::min(s.g0, s.g1);
        const double hi = std::max(s.g0, s.g1);
        if (hi == lo) {
            ev.push_back({lo, 0.0, len});
        } else {
            const double r = len / (hi - lo);
            ev.push_back({lo, r, 0.0});
            ev.push_back({hi, -r, 0.0});
        }
    }
    if (ev.empty()) return 0.0;
    std::sort(ev.begin(), ev.end(), [](const ValueEvent& a, const ValueEvent& b) { return a.value < b.value; });
    const double lo = reach(ev, 0.5 * total, false);
    const double hi = reach(ev, 0.5 * total, true);
    return 0.5 * (lo + std::max(lo, hi));
}

CdfDifference cdf_difference(const Measure& m1, const Measure& m2) {
    std::vector<double> cuts{0.0, 1.0};
    for (const Measure* m : {&m1, &m2}) {
        for (const Atom& a : m->atoms()) cuts.push_back(a.position);
        for (const Piece& p : m->pieces()) {
            cuts.push_back(p.left);
            cuts.push_back(p.right);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::vector<CdfSegment> segs;
    segs.reserve(cuts.size());
    double prev_closed = m1.mass(0.0, 0.0, true) - m2.mass(0.0, 0.0, true);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double b = cuts[i + 1];
        const double open = m1.mass(0.0, b, false) - m2.mass(0.0, b, false);
        segs.push_back(CdfSegment{cuts[i], b, prev_closed, open});
        if (i + 2 < cuts.size()) prev_closed = m1.mass(0.0, b, true) - m2.mass(0.0, b, true);
    }
    return CdfDifference(std::move(segs));
}

namespace {

PiecewiseLinearFn build_witness(const CdfDifference& g, double c) {
    // psi' = -sign(G - c); where G == c the slope balances the total to zero.
    struct Run {
        double x0, x1;
        int sign;  // +1: G > c, -1: G < c, 0: G == c
    };
    std::vector<Run> runs;
    double imbalance = 0.0;
    double flat = 0.0;
    auto add = [&](double x0, double x1, int sign) {
        if (!(x1 > x0)) return;
        runs.push_back({x0, x1, sign});
        if (sign == 0) flat += x1 - x0;
        else imbalance += -sign * (x1 - x0);
    };
    for (const CdfSegment& s : g.segments()) {
        const double a = s.g0 - c;
        const double b = s.g1 - c;
        if (a == 0.0 && b == 0.0) {
            add(s.x0, s.x1, 0);
        } else if (a >= 0.0 && b >= 0.0) {
            add(s.x0, s.x1, 1);
        } else if (a <= 0.0 && b <= 0.0) {
            add(s.x0, s.x1, -1);
        } else {
            const double xc = s.x0 + (s.x1 - s.x0) * a / (a - b);
            add(s.x0, xc, a > 0.0 ? 1 : -1);
            add(xc, s.x1, b > 0.0 ? 1 : -1);
        }
    }
    const double flat_slope = flat > 0.0 ? std::clamp(-imbalance / flat, -1.0, 1.0) : 0.0;
    std::vector<double> xs{0.0};
    std::vector<double> ys{0.0};
    double psi = 0.0;
    for (const Run& r : runs) {
        const double slope = r.sign == 0 ? flat_slope : -static_cast<double>(r.sign);
        psi += slope * (r.x1 - r.x0);
        if (r.x1 > xs.back()) {
            xs.push_back(r.x1);
            ys.push_back(psi);
        }
    }
    // Remove the rounding residue at 1 and renormalize the Lipschitz constant.
    const double end = ys.back();
    for (std::size_t i = 0; i < xs.size(); ++i) ys[i] -= end * xs[i];
    PiecewiseLinearFn f(std::move(xs), std::move(ys));
    const double lip = f.lipschitz();
    return lip > 1.0 ? f.scaled(1.0 / lip) : f;
}

}  // namespace

W1Result w1_supported(const Measure& m1, const Measure& m2, bool with_witness) {
    if (!m1.supported_in(0.0, 1.0) || !m2.supported_in(0.0, 1.0)) {
        throw DomainError("w1_supported needs measures supported in [0,1]");
    }
    W1Result r;
    if (m1.is_zero() && m2.is_zero()) {
        if (with_witness) r.witness = PiecewiseLinearFn({0.0, 1.0}, {0.0, 0.0});
        return r;
    }
    const CdfDifference g = cdf_difference(m1, m2);
    r.optimal_shift = g.median();
    r.value = g.l1_distance(r.optimal_shift);
    if (with_witness) r.witness = build_witness(g, r.optimal_shift);
    return r;
}

double w1_unrestricted(const Measure& m1, const Measure& m2) {
    if (!m1.supported_in(0.0, 1.0) || !m2.supported_in(0.0, 1.0)) {
        throw DomainError("w1_unrestricted needs measures supported in [0,1]");
    }
    if (std::abs(m1.total() - m2.total()) > 1e-9) {
        throw DomainError("w1_unrestricted needs equal total masses");
    }
    return cdf_difference(m1, m2).l1_distance(0.0);
}

namespace {

// w[i] += integral of the grid hat centred at i/n against m.
void accumulate_hats(const Measure& m, int n, double sign, std::vector<double>& w) {
    const double h = 1.0 / n;
    auto add_cell = [&](int k, double u, double v, double density) {
        // On cell [k h, (k+1) h] the hats k (falling) and k+1 (rising) live.
        const double xk = k * h;
        const double rise = ((v - xk) * (v - xk) - (u - xk) * (u - xk)) / (2.0 * h);
        const double len = v - u;
        w[static_cast<std::size_t>(k)] += sign * density * (len - rise);
        w[static_cast<std::size_t>(k + 1)] += sign * density * rise;
    };
    for (const Atom& a : m.atoms()) {
        const double s = a.position * n;
        int k = static_cast<int>(std::floor(s));
        if (k >= n) k = n - 1;
        const double t = s - k;
        w[static_cast<std::size_t>(k)] += sign * a.weight * (1.0 - t);
        w[static_cast<std::size_t>(k + 1)] += sign * a.weight * t;
    }
    for (const Piece& p : m.pieces()) {
        const double d = p.density();
        int k = std::min(n - 1, static_cast<int>(std::floor(p.left * n)));
        double u = p.left;
        while (u < p.right && k < n) {
            const double v = std::min(p.right, (k + 1) * h);
            if (v > u) add_cell(k, u, v, d);
            u = v;
            ++k;
        }
    }
}

}  // namespace

double w1_oracle(const Measure& m1, const Measure& m2, int grid_n) {
    if (grid_n < 2) throw ParameterError("grid_n must be at least 2");
    std::vector<double> w(static_cast<std::size_t>(grid_n) + 1, 0.0);
    accumulate_hats(m1, grid_n, 1.0, w);
    accumulate_hats(m2, grid_n, -1.0, w);
    // psi = sum psi_i hat_i with cell slopes s_k in [-1,1], sum s_k = 0, gives
    // h * sum_k s_k W_k with W_k = sum_{0 < i, i > k, i < n} w_i.
    std::vector<double> big_w(static_cast<std::size_t>(grid_n));
    double acc = 0.0;
    for (int k = grid_n - 1; k >= 0; --k) {
        big_w[static_cast<std::size_t>(k)] = acc;
        if (k >= 1) acc += w[static_cast<std::size_t>(k)];
    }
    std::sort(big_w.begin(), big_w.end());
    const std::size_t half = big_w.size() / 2;
    double lo = 0.0;
    double hi = 0.0;
    for (std::size_t i = 0; i < half; ++i) {
        lo += big_w[i];
        hi += big_w[big_w.size() - 1 - i];
    }
    return (hi - lo) / grid_n;
}

}  // namespace sqfn
