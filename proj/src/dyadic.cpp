#include "sqfn/dyadic.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace sqfn {

namespace {

std::int64_t pow2(int j) { return std::int64_t{1} << j; }

std::int64_t mod(std::int64_t a, std::int64_t m) {
    const std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

std::int64_t floor_div2(std::int64_t a) { return a >= 0 ? a / 2 : -((-a + 1) / 2); }

void check(const DyadicInterval& i) {
    if (i.level < 0 || i.level > kMaxLevel || i.index < 0 || i.index >= pow2(i.level)) {
        throw RangeError("dyadic interval out of range: " + i.to_string());
    }
}

}  // namespace

double DyadicInterval::length() const { return std::ldexp(1.0, -level); }
double DyadicInterval::left() const { return std::ldexp(static_cast<double>(index), -level); }
double DyadicInterval::right() const { return std::ldexp(static_cast<double>(index + 1), -level); }

std::uint64_t DyadicInterval::key() const {
    // Heap numbering 2^j + k is unique per system for j <= 60.
    return (static_cast<std::uint64_t>(system) << 61) ^ (static_cast<std::uint64_t>(pow2(level)) + static_cast<std::uint64_t>(index));
}

std::string DyadicInterval::to_string() const {
    return std::to_string(level) + ":" + std::to_string(index) + "@" + std::to_string(system);
}

DyadicInterval DyadicInterval::parse(std::string_view text) {
    DyadicInterval out;
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) throw ParameterError("interval format is j:k[@system]");
    const auto at = text.find('@');
    auto num = [&](std::string_view s, auto& v) {
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size()) {
            throw ParameterError("bad interval '" + std::string(text) + "'");
        }
    };
    num(text.substr(0, colon), out.level);
    num(text.substr(colon + 1, at == std::string_view::npos ? std::string_view::npos : at - colon - 1), out.index);
    if (at != std::string_view::npos) num(text.substr(at + 1), out.system);
    check(out);
    return out;
}

DyadicInterval parent(const DyadicInterval& i) {
    if (i.level == 0) throw RangeError("parent of a root interval");
    return {i.system, i.level - 1, i.index / 2};
}

DyadicInterval left_child(const DyadicInterval& i) {
    if (i.level >= kMaxLevel) throw RangeError("level overflow");
    return {i.system, i.level + 1, 2 * i.index};
}

DyadicInterval right_child(const DyadicInterval& i) {
    if (i.level >= kMaxLevel) throw RangeError("level overflow");
    return {i.system, i.level + 1, 2 * i.index + 1};
}

DyadicInterval minus_chain(const DyadicInterval& i, int k) {
    if (k < 0 || i.level + k > kMaxLevel) throw RangeError("chain leaves the level range");
    return {i.system, i.level + k, i.index << k};
}

DyadicInterval plus_chain(const DyadicInterval& i, int k) {
    if (k < 0 || i.level + k > kMaxLevel) throw RangeError("chain leaves the level range");
    return {i.system, i.level + k, ((i.index + 1) << k) - 1};
}

bool contains(const DyadicInterval& outer, const DyadicInterval& inner) {
    if (outer.system != inner.system || inner.level < outer.level) return false;
    return (inner.index >> (inner.level - outer.level)) == outer.index;
}

DyadicInterval locate(double x, int level) {
    if (level < 0 || level > kMaxLevel) throw RangeError("level out of range");
    const double s = std::floor(std::ldexp(x, level));
    const std::int64_t k = std::clamp<std::int64_t>(static_cast<std::int64_t>(s), 0, pow2(level) - 1);
    return {0, level, k};
}

DyadicInterval navigate(const DyadicInterval& i, Step step) {
    switch (step.kind) {
        case StepKind::parent: return parent(i);
        case StepKind::left: return left_child(i);
        case StepKind::right: return right_child(i);
        case StepKind::minus_chain: return minus_chain(i, step.k);
        case StepKind::plus_chain: return plus_chain(i, step.k);
    }
    return i;
}

DyadicSystem::DyadicSystem(Kind kind, int id, std::vector<double> shifts)
    : kind_(kind), id_(id), shifts_(std::move(shifts)) {
    if (shifts_.empty()) throw ParameterError("dyadic system needs at least one level");
    for (std::size_t j = 0; j < shifts_.size(); ++j) {
        const double s = shifts_[j];
        const double len = std::ldexp(1.0, -static_cast<int>(j));
        if (!(s >= 0.0 && s < len)) throw ParameterError("shift s_j must lie in [0, 2^-j)");
    }
    offsets_.resize(shifts_.size() - 1);
    for (std::size_t j = 0; j + 1 < shifts_.size(); ++j) {
        const double d = std::ldexp(shifts_[j] - shifts_[j + 1], static_cast<int>(j) + 1);
        const double r = std::round(d);
        if (std::abs(d - r) > 1e-6) {
            throw ParameterError("level " + std::to_string(j + 1) + " does not refine level " + std::to_string(j));
        }
        offsets_[j] = static_cast<std::int64_t>(r);
    }
}

DyadicSystem DyadicSystem::standard(int max_level) {
    return DyadicSystem(Kind::standard, 0, std::vector<double>(static_cast<std::size_t>(max_level) + 1, 0.0));
}

DyadicSystem DyadicSystem::one_third(int sign, int id, int max_level) {
    if (sign != 1 && sign != -1) throw ParameterError("sign must be +1 or -1");
    if (max_level > 50) throw ParameterError("shifted systems support levels <= 50");
    std::vector<double> shifts;
    for (int j = 0; j <= max_level; ++j) {
        const double len = std::ldexp(1.0, -j);
        double s = sign * ((j % 2 == 0) ? 1.0 : -1.0) / 3.0 * len;
        s = std::fmod(s, len);
        if (s < 0.0) s += len;
        shifts.push_back(s);
    }
    return DyadicSystem(Kind::shifted, id, std::move(shifts));
}

DyadicSystem DyadicSystem::generalized(std::vector<double> shifts, int id) {
    return DyadicSystem(Kind::generalized, id, std::move(shifts));
}

Window DyadicSystem::window(const DyadicInterval& i) const {
    if (i.level > max_level()) throw RangeError("level beyond the system's max_level");
    const double len = std::ldexp(1.0, -i.level);
    const double left = shifts_[static_cast<std::size_t>(i.level)] + static_cast<double>(i.index) * len;
    return Window{left, left + len, kind_ == Kind::standard ? Extension::zero : Extension::periodic};
}

DyadicInterval DyadicSystem::parent(const DyadicInterval& i) const {
    if (i.level == 0) throw RangeError("parent of a root interval");
    const std::int64_t d = offsets_[static_cast<std::size_t>(i.level - 1)];
    return {id_, i.level - 1, mod(floor_div2(i.index - d), pow2(i.level - 1))};
}

DyadicInterval DyadicSystem::child(const DyadicInterval& i, int side) const {
    if (i.level >= max_level()) throw RangeError("level overflow");
    const std::int64_t d = offsets_[static_cast<std::size_t>(i.level)];
    return {id_, i.level + 1, mod(2 * i.index + d + side, pow2(i.level + 1))};
}

DyadicInterval DyadicSystem::locate(double x, int level) const {
    if (level < 0 || level > max_level()) throw RangeError("level out of range");
    const double u = std::floor(std::ldexp(x - shifts_[static_cast<std::size_t>(level)], level));
    return {id_, level, mod(static_cast<std::int64_t>(u), pow2(level))};
}

std::optional<DyadicInterval> DyadicSystem::cover(double a, double b) const {
    if (!(b >= a)) return std::nullopt;
    int start = max_level();
    if (b > a) start = std::min(start, static_cast<int>(std::floor(-std::log2(b - a))));
    for (int j = std::max(start, 0); j >= 0; --j) {
        const double s = shifts_[static_cast<std::size_t>(j)];
        const double u = std::floor(std::ldexp(a - s, j));
        const double v = std::ldexp(b - s, j);
        if (v <= u + 1.0) {
            if (kind_ == Kind::standard && (u < 0.0 || u >= std::ldexp(1.0, j))) return std::nullopt;
            return DyadicInterval{id_, j, mod(static_cast<std::int64_t>(u), pow2(j))};
        }
    }
    return std::nullopt;
}

bool DyadicSystem::verify(int levels, std::string* why) const {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    levels = std::min(levels, max_level());
    for (int j = 0; j <= levels; ++j) {
        // (D1)/(D2): consecutive windows abut and have length 2^-j, and the
        // 2^j windows cover one period.
        const std::int64_t n = pow2(j);
        const double len = std::ldexp(1.0, -j);
        const std::int64_t probe = std::min<std::int64_t>(n, 4096);
        for (std::int64_t k = 0; k < probe; ++k) {
            const Window w = window({id_, j, k});
            // Shifts like 1/3 are not dyadic rationals, so allow rounding.
            if (std::abs(w.length() - len) > 1e-12 * len) return fail("length mismatch at level " + std::to_string(j));
            if (k + 1 < n && std::abs(window({id_, j, k + 1}).left - w.right) > 1e-12) {
                return fail("gap at level " + std::to_string(j));
            }
        }
        const Window last = window({id_, j, n - 1});
        if (std::abs(last.right - window({id_, j, 0}).left - 1.0) > 1e-12) {
            return fail("level " + std::to_string(j) + " does not tile one period");
        }
        // (D3): children halve their parent.
        if (j < levels) {
            for (std::int64_t k = 0; k < probe; ++k) {
                const DyadicInterval i{id_, j, k};
                const Window w = window(i);
                const Window l = window(child(i, 0));
                const Window r = window(child(i, 1));
                auto same = [](double x, double y) {
                    const double d = std::abs(x - y);
                    return d < 1e-12 || std::abs(d - 1.0) < 1e-12;
                };
                if (!same(l.left, w.left) || !same(r.right, w.right) || !same(l.right, r.left)) {
                    return fail("children do not halve " + i.to_string());
                }
                if (parent(child(i, 0)) != i || parent(child(i, 1)) != i) {
                    return fail("parent/child mismatch at " + i.to_string());
                }
            }
        }
    }
    return true;
}

std::vector<DyadicSystem> shifted_systems(int count) {
    if (count != 2 && count != 3) throw ParameterError("shifted_systems supports count 2 or 3");
    std::vector<DyadicSystem> out{DyadicSystem::standard(), DyadicSystem::one_third(1, 1)};
    if (count == 3) out.push_back(DyadicSystem::one_third(-1, 2));
    return out;
}

std::optional<Cover> best_cover(const std::vector<DyadicSystem>& systems, double a, double b) {
    std::optional<Cover> best;
    for (std::size_t s = 0; s < systems.size(); ++s) {
        auto j = systems[s].cover(a, b);
        if (!j) continue;
        const double ratio = b > a ? j->length() / (b - a) : std::numeric_limits<double>::infinity();
        if (!best || ratio < best->ratio) best = Cover{*j, static_cast<int>(s), ratio};
    }
    return best;
}

double delta(const Measure& mu, const Measure& nu, const Window& w) {
    const Window half{w.left, w.left + 0.5 * w.length(), w.extension};
    const double mi = mu.mass(w);
    const double ni = nu.mass(w);
    if (mi == 0.0 || ni == 0.0) return 0.0;
    return std::abs(mu.mass(half) / mi - nu.mass(half) / ni);
}

double delta(const Measure& mu, const Measure& nu, const DyadicInterval& i, const DyadicSystem& system) {
    return delta(mu, nu, system.window(i));
}

DoublingReport doubling_constant(const Measure& nu, const DyadicSystem& system, int depth) {
    DoublingReport r;
    r.depth = depth;
    r.worst = system.root();
    if (depth > 24) throw ParameterError("doubling check depth capped at 24");
    for (int j = 1; j <= depth; ++j) {
        for (std::int64_t k = 0; k < pow2(j); ++k) {
            const DyadicInterval i{system.id(), j, k};
            const double m = nu.mass(system.window(i));
            const double mp = nu.mass(system.window(system.parent(i)));
            if (m == 0.0) {
                if (r.finite) r.worst = i;
                r.finite = false;
                r.constant = std::numeric_limits<double>::infinity();
                continue;
            }
            if (r.finite && mp / m > r.constant) {
                r.constant = mp / m;
                r.worst = i;
            }
        }
    }
    return r;
}

TailTip tail_tip(const DyadicInterval& i, int n1, int n2, int max_level) {
    if (n1 < 0 || n2 < -1) throw ParameterError("tail_tip needs N1 >= 0 and N2 >= -1");
    if (n2 == -1 && n1 != 0) throw ParameterError("N2 = -1 requires N1 = 0");
    TailTip t;
    if (n2 == -1) {
        t.degenerate = true;
        t.tail = {i};
        t.tip = {left_child(i)};
        return t;
    }
    auto chain_end = [&](int n, bool& infinite, int offset) {
        if (n == kInfinite) {
            infinite = true;
            t.truncated_at = max_level;
            return max_level - i.level - offset;
        }
        if (i.level + offset + n + 1 > kMaxLevel) throw RangeError("Tail/Tip chain exceeds the level range");
        return n;
    };
    const int m1 = chain_end(n1, t.minus_infinite, 0);
    const DyadicInterval im = left_child(i);
    const int m2 = chain_end(n2, t.plus_infinite, 1);
    for (int k = 0; k <= m1; ++k) t.tail.push_back(minus_chain(i, k));
    for (int k = 0; k <= m2; ++k) {
        const DyadicInterval j = plus_chain(im, k);
        if (std::find(t.tail.begin(), t.tail.end(), j) == t.tail.end()) t.tail.push_back(j);
    }
    if (!t.minus_infinite) t.tip.push_back(minus_chain(i, n1 + 1));
    if (!t.plus_infinite) t.tip.push_back(plus_chain(im, n2 + 1));
    return t;
}

}  // namespace sqfn
