#include "sqfn/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sqfn {

PiecewiseLinearFn::PiecewiseLinearFn(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
    if (xs_.size() != ys_.size()) throw ParameterError("breakpoint/value size mismatch");
    for (std::size_t i = 1; i < xs_.size(); ++i) {
        if (!(xs_[i] > xs_[i - 1])) throw ParameterError("breakpoints must be strictly increasing");
    }
}

PiecewiseLinearFn PiecewiseLinearFn::trapezoid(double a, double b, double c, double d, double h) {
    std::vector<double> xs{a};
    std::vector<double> ys{0.0};
    if (b > a) {
        xs.push_back(b);
        ys.push_back(h);
    }
    if (c > xs.back()) {
        xs.push_back(c);
        ys.push_back(h);
    }
    if (d > xs.back()) {
        xs.push_back(d);
        ys.push_back(0.0);
    } else {
        ys.back() = 0.0;
    }
    return PiecewiseLinearFn(std::move(xs), std::move(ys));
}

PiecewiseLinearFn PiecewiseLinearFn::tent(double a, double b) {
    const double m = 0.5 * (a + b);
    return PiecewiseLinearFn({a, m, b}, {0.0, 0.5 * (b - a), 0.0});
}

double PiecewiseLinearFn::operator()(double x) const {
    if (xs_.empty() || x < xs_.front() || x > xs_.back()) return 0.0;
    auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    if (it == xs_.end()) return ys_.back();
    const std::size_t i = static_cast<std::size_t>(it - xs_.begin());
    const double t = (x - xs_[i - 1]) / (xs_[i] - xs_[i - 1]);
    return ys_[i - 1] + t * (ys_[i] - ys_[i - 1]);
}

double PiecewiseLinearFn::lipschitz() const {
    double l = 0.0;
    for (std::size_t i = 1; i < xs_.size(); ++i) {
        l = std::max(l, std::abs(ys_[i] - ys_[i - 1]) / (xs_[i] - xs_[i - 1]));
    }
    return l;
}

double PiecewiseLinearFn::sup_norm() const {
    double s = 0.0;
    for (double y : ys_) s = std::max(s, std::abs(y));
    return s;
}

PiecewiseLinearFn PiecewiseLinearFn::scaled(double s) const {
    std::vector<double> ys = ys_;
    for (double& y : ys) y *= s;
    return PiecewiseLinearFn(xs_, std::move(ys));
}

PiecewiseLinearFn PiecewiseLinearFn::transported(double a, double b) const {
    std::vector<double> xs = xs_;
    for (double& x : xs) x = a + x * (b - a);
    return PiecewiseLinearFn(std::move(xs), ys_);
}

PiecewiseLinearFn PiecewiseLinearFn::operator+(const PiecewiseLinearFn& other) const {
    if (empty()) return other;
    if (other.empty()) return *this;
    if (ys_.front() != 0.0 || ys_.back() != 0.0 || other.ys_.front() != 0.0 ||
        other.ys_.back() != 0.0) {
        throw ParameterError("sum requires functions vanishing at their end breakpoints");
    }
    std::vector<double> xs;
    xs.reserve(xs_.size() + other.xs_.size());
    std::merge(xs_.begin(), xs_.end(), other.xs_.begin(), other.xs_.end(), std::back_inserter(xs));
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::vector<double> ys(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = (*this)(xs[i]) + other(xs[i]);
    return PiecewiseLinearFn(std::move(xs), std::move(ys));
}

namespace detail {

RangeSum::RangeSum(const std::vector<double>& terms) : n_(terms.size()), tree_(2 * terms.size()) {
    std::copy(terms.begin(), terms.end(), tree_.begin() + static_cast<std::ptrdiff_t>(n_));
    for (std::size_t i = n_; i-- > 1;) tree_[i] = tree_[2 * i] + tree_[2 * i + 1];
}

double RangeSum::sum(std::size_t lo, std::size_t hi) const {
    double s = 0.0;
    for (lo += n_, hi += n_; lo < hi; lo >>= 1, hi >>= 1) {
        if (lo & 1) s += tree_[lo++];
        if (hi & 1) s += tree_[--hi];
    }
    return s;
}

}  // namespace detail

Measure::Measure(std::vector<Atom> atoms, std::vector<Piece> pieces) {
    for (const Atom& a : atoms) {
        if (!(a.position >= 0.0 && a.position <= 1.0)) throw DomainError("atom outside [0,1]");
        if (!(a.weight >= 0.0)) throw DomainError("negative atom weight");
    }
    for (const Piece& p : pieces) {
        if (!(p.left >= 0.0 && p.right <= 1.0 && p.left < p.right)) {
            throw DomainError("piece must satisfy 0 <= left < right <= 1");
        }
        if (!(p.mass >= 0.0)) throw DomainError("negative piece mass");
    }
    std::erase_if(atoms, [](const Atom& a) { return a.weight == 0.0; });
    std::erase_if(pieces, [](const Piece& p) { return p.mass == 0.0; });
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& x, const Atom& y) { return x.position < y.position; });
    for (const Atom& a : atoms) {
        if (!atoms_.empty() && atoms_.back().position == a.position) {
            atoms_.back().weight += a.weight;
        } else {
            atoms_.push_back(a);
        }
    }
    std::sort(pieces.begin(), pieces.end(),
              [](const Piece& x, const Piece& y) { return x.left < y.left; });
    for (std::size_t i = 1; i < pieces.size(); ++i) {
        if (pieces[i].left < pieces[i - 1].right) throw DomainError("overlapping pieces");
    }
    pieces_ = std::move(pieces);

    std::vector<double> aw(atoms_.size());
    atom_pos_.resize(atoms_.size());
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        atom_pos_[i] = atoms_[i].position;
        aw[i] = atoms_[i].weight;
    }
    std::vector<double> pm(pieces_.size());
    piece_left_.resize(pieces_.size());
    piece_right_.resize(pieces_.size());
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        piece_left_[i] = pieces_[i].left;
        piece_right_[i] = pieces_[i].right;
        pm[i] = pieces_[i].mass;
    }
    atom_sum_ = detail::RangeSum(aw);
    piece_sum_ = detail::RangeSum(pm);
    total_ = atom_sum_.sum(0, aw.size()) + piece_sum_.sum(0, pm.size());
}

Measure Measure::lebesgue() { return Measure({}, {Piece{0.0, 1.0, 1.0}}); }

Measure Measure::dirac(double x, double weight) { return Measure({Atom{x, weight}}, {}); }

Measure Measure::uniform(double a, double b, double mass) { return Measure({}, {Piece{a, b, mass}}); }

Measure Measure::histogram(int depth, const std::vector<double>& masses) {
    if (depth < 0 || depth > kMaxGeneratorDepth) throw ParameterError("histogram depth out of range");
    const std::size_t n = std::size_t{1} << depth;
    if (masses.size() != n) throw ParameterError("histogram needs 2^depth cell masses");
    std::vector<Piece> pieces;
    pieces.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (masses[k] < 0.0) throw ParameterError("negative histogram mass");
        pieces.push_back(Piece{std::ldexp(static_cast<double>(k), -depth),
                               std::ldexp(static_cast<double>(k + 1), -depth), masses[k]});
    }
    return Measure({}, std::move(pieces));
}

double Measure::atom_mass(double a, double b, bool closed_right) const {
    auto lo = std::lower_bound(atom_pos_.begin(), atom_pos_.end(), a);
    auto hi = closed_right ? std::upper_bound(atom_pos_.begin(), atom_pos_.end(), b)
                           : std::lower_bound(atom_pos_.begin(), atom_pos_.end(), b);
    if (hi <= lo) return 0.0;
    return atom_sum_.sum(static_cast<std::size_t>(lo - atom_pos_.begin()),
                         static_cast<std::size_t>(hi - atom_pos_.begin()));
}

double Measure::piece_mass(double a, double b) const {
    if (!(b > a) || pieces_.empty()) return 0.0;
    const std::size_t i0 = static_cast<std::size_t>(
        std::upper_bound(piece_right_.begin(), piece_right_.end(), a) - piece_right_.begin());
    const std::size_t i1 = static_cast<std::size_t>(
        std::lower_bound(piece_left_.begin(), piece_left_.end(), b) - piece_left_.begin());
    if (i0 >= i1) return 0.0;
    auto part = [&](const Piece& p) {
        if (a <= p.left && p.right <= b) return p.mass;
        const double lo = std::max(a, p.left);
        const double hi = std::min(b, p.right);
        return hi > lo ? p.density() * (hi - lo) : 0.0;
    };
    if (i1 - i0 == 1) return part(pieces_[i0]);
    return part(pieces_[i0]) + piece_sum_.sum(i0 + 1, i1 - 1) + part(pieces_[i1 - 1]);
}

double Measure::mass(double a, double b, bool closed_right) const {
    if (b < a) return 0.0;
    return atom_mass(a, b, closed_right) + piece_mass(a, b);
}

double Measure::mass_halfopen(double a, double b) const { return mass(a, b, false); }

double Measure::mass(const Window& w) const {
    if (w.extension == Extension::zero) return mass_halfopen(w.left, w.right);
    double m = 0.0;
    for (int t = -1; t <= 1; ++t) {
        const double lo = std::max(w.left + t, 0.0);
        const double hi = std::min(w.right + t, 1.0);
        if (hi > lo) m += mass_halfopen(lo, hi);
    }
    return m;
}

double Measure::integrate(const PiecewiseLinearFn& f) const {
    if (f.empty()) return 0.0;
    const auto& xs = f.breakpoints();
    const auto& ys = f.values();
    double s = 0.0;
    for (const Atom& a : atoms_) s += a.weight * f(a.position);
    if (xs.size() < 2) return s;
    const double lo = xs.front();
    const double hi = xs.back();
    std::size_t i = static_cast<std::size_t>(
        std::upper_bound(piece_right_.begin(), piece_right_.end(), lo) - piece_right_.begin());
    std::size_t seg = 0;  // current segment [xs[seg], xs[seg+1]]
    for (; i < pieces_.size() && pieces_[i].left < hi; ++i) {
        const Piece& p = pieces_[i];
        const double l = std::max(p.left, lo);
        const double r = std::min(p.right, hi);
        if (!(r > l)) continue;
        while (seg + 2 < xs.size() && xs[seg + 1] <= l) ++seg;
        const double d = p.density();
        if (r <= xs[seg + 1]) {
            const double mass = (l == p.left && r == p.right) ? p.mass : d * (r - l);
            s += mass * 0.5 * (f(l) + f(r));
            continue;
        }
        double u = l;
        std::size_t k = seg;
        while (u < r) {
            const double v = std::min(r, xs[k + 1]);
            auto val = [&](double x) {
                const double t = (x - xs[k]) / (xs[k + 1] - xs[k]);
                return ys[k] + t * (ys[k + 1] - ys[k]);
            };
            s += d * (v - u) * 0.5 * (val(u) + val(v));
            u = v;
            if (k + 2 < xs.size()) ++k;
            else break;
        }
    }
    return s;
}

bool Measure::supported_in(double a, double b) const {
    for (const Atom& x : atoms_) {
        if (x.position < a || x.position > b) return false;
    }
    for (const Piece& p : pieces_) {
        if (p.left < a || p.right > b) return false;
    }
    return true;
}

Measure Measure::restrict(double a, double b) const {
    std::vector<Atom> atoms;
    std::vector<Piece> pieces;
    for (const Atom& x : atoms_) {
        if (x.position >= a && x.position < b) atoms.push_back(x);
    }
    const std::size_t i0 = static_cast<std::size_t>(
        std::upper_bound(piece_right_.begin(), piece_right_.end(), a) - piece_right_.begin());
    for (std::size_t i = i0; i < pieces_.size() && pieces_[i].left < b; ++i) {
        const Piece& p = pieces_[i];
        if (a <= p.left && p.right <= b) {
            pieces.push_back(p);
            continue;
        }
        const double lo = std::max(a, p.left);
        const double hi = std::min(b, p.right);
        if (hi > lo) pieces.push_back(Piece{lo, hi, p.density() * (hi - lo)});
    }
    return Measure(std::move(atoms), std::move(pieces));
}

namespace {

// Appends the part of m inside [lo, hi) mapped by x -> (x + shift - a) / len.
void append_mapped(const Measure& m, double lo, double hi, double shift, double a, double len,
                   std::vector<Atom>& atoms, std::vector<Piece>& pieces) {
    auto map = [&](double x) { return std::clamp((x + shift - a) / len, 0.0, 1.0); };
    const auto& as = m.atoms();
    auto it = std::lower_bound(as.begin(), as.end(), lo,
                               [](const Atom& x, double v) { return x.position < v; });
    for (; it != as.end() && it->position < hi; ++it) atoms.push_back(Atom{map(it->position), it->weight});
    const auto& ps = m.pieces();
    auto pt = std::upper_bound(ps.begin(), ps.end(), lo,
                               [](double v, const Piece& p) { return v < p.right; });
    for (; pt != ps.end() && pt->left < hi; ++pt) {
        const Piece& p = *pt;
        const bool inside = lo <= p.left && p.right <= hi;
        const double l = std::max(lo, p.left);
        const double r = std::min(hi, p.right);
        if (!(r > l)) continue;
        const double ml = map(l);
        const double mr = map(r);
        if (!(mr > ml)) continue;
        pieces.push_back(Piece{ml, mr, inside ? p.mass : p.density() * (r - l)});
    }
}

}  // namespace

Measure Measure::restrict(const Window& w) const {
    if (w.extension == Extension::zero) return restrict(w.left, w.right);
    std::vector<Atom> atoms;
    std::vector<Piece> pieces;
    for (int t = -1; t <= 1; ++t) {
        const double lo = std::max(w.left + t, 0.0);
        const double hi = std::min(w.right + t, 1.0);
        if (hi > lo) append_mapped(*this, lo, hi, 0.0, 0.0, 1.0, atoms, pieces);
    }
    return Measure(std::move(atoms), std::move(pieces));
}

Measure Measure::blowup(double a, double b) const { return blowup(Window{a, b, Extension::zero}); }

Measure Measure::blowup(const Window& w) const {
    if (!(w.right > w.left)) throw ParameterError("blowup needs a < b");
    std::vector<Atom> atoms;
    std::vector<Piece> pieces;
    const double len = w.right - w.left;
    if (w.extension == Extension::zero) {
        append_mapped(*this, w.left, w.right, 0.0, w.left, len, atoms, pieces);
    } else {
        for (int t = -1; t <= 1; ++t) {
            const double lo = std::max(w.left + t, 0.0);
            const double hi = std::min(w.right + t, 1.0);
            if (hi > lo) append_mapped(*this, lo, hi, -static_cast<double>(t), w.left, len, atoms, pieces);
        }
    }
    return Measure(std::move(atoms), std::move(pieces));
}

Measure Measure::scaled(double s) const {
    if (!(s >= 0.0)) throw DomainError("negative scale");
    std::vector<Atom> atoms = atoms_;
    std::vector<Piece> pieces = pieces_;
    for (Atom& a : atoms) a.weight *= s;
    for (Piece& p : pieces) p.mass *= s;
    return Measure(std::move(atoms), std::move(pieces));
}

Measure Measure::normalized() const {
    if (total_ == 0.0) return *this;
    return scaled(1.0 / total_);
}

Measure Measure::operator+(const Measure& other) const {
    std::vector<Atom> atoms = atoms_;
    atoms.insert(atoms.end(), other.atoms_.begin(), other.atoms_.end());
    // Elementary intervals between all piece endpoints, densities added.
    std::vector<double> cuts;
    for (const Piece& p : pieces_) {
        cuts.push_back(p.left);
        cuts.push_back(p.right);
    }
    for (const Piece& p : other.pieces_) {
        cuts.push_back(p.left);
        cuts.push_back(p.right);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    auto density_at = [](const Measure& m, double x) {
        const auto& ps = m.pieces_;
        auto it = std::upper_bound(ps.begin(), ps.end(), x,
                                   [](double v, const Piece& p) { return v < p.right; });
        if (it != ps.end() && it->left <= x) return it->density();
        return 0.0;
    };
    std::vector<Piece> pieces;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double l = cuts[i];
        const double r = cuts[i + 1];
        const double mid = 0.5 * (l + r);
        const double d = density_at(*this, mid) + density_at(other, mid);
        if (d > 0.0) pieces.push_back(Piece{l, r, d * (r - l)});
    }
    return Measure(std::move(atoms), std::move(pieces));
}

std::vector<double> Measure::boundary_atoms(int max_level) const {
    std::vector<double> out;
    for (const Atom& a : atoms_) {
        const double s = std::ldexp(a.position, max_level);
        if (s == std::floor(s)) out.push_back(a.position);
    }
    return out;
}

nlohmann::json Measure::to_json() const {
    nlohmann::json atoms = nlohmann::json::array();
    for (const Atom& a : atoms_) atoms.push_back({a.position, a.weight});
    nlohmann::json pieces = nlohmann::json::array();
    for (const Piece& p : pieces_) pieces.push_back({p.left, p.right, p.mass});
    return {{"atoms", atoms}, {"pieces", pieces}, {"total", total_}};
}

Measure Measure::from_json(const nlohmann::json& j) {
    std::vector<Atom> atoms;
    std::vector<Piece> pieces;
    for (const auto& a : j.at("atoms")) atoms.push_back(Atom{a.at(0).get<double>(), a.at(1).get<double>()});
    for (const auto& p : j.at("pieces")) {
        pieces.push_back(Piece{p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
    }
    return Measure(std::move(atoms), std::move(pieces));
}

}  // namespace sqfn
