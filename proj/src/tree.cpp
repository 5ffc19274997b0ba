#include "sqfn/tree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

namespace sqfn {

Tree::Tree(DyadicInterval top, int max_level, std::vector<DyadicInterval> leaves, bool null_top)
    : top_(top), max_level_(max_level), leaves_(std::move(leaves)), null_top_(null_top) {
    if (top_.system != 0) throw ParameterError("trees live in the standard system");
    if (max_level_ < top_.level) throw ParameterError("tree max_level above its top");
    std::sort(leaves_.begin(), leaves_.end(),
              [](const DyadicInterval& a, const DyadicInterval& b) { return a.left() < b.left(); });
    for (const DyadicInterval& l : leaves_) {
        if (!sqfn::contains(top_, l) || l.level > max_level_) throw ParameterError("leaf outside the tree range");
        leaf_keys_.insert(l.key());
    }
}

Tree Tree::full(DyadicInterval top, int levels) {
    if (levels < 1) throw ParameterError("a tree has at least one level");
    return Tree(top, top.level + levels - 1, {});
}

bool Tree::is_leaf(const DyadicInterval& i) const { return leaf_keys_.count(i.key()) > 0; }

bool Tree::contains(const DyadicInterval& i) const {
    if (!sqfn::contains(top_, i) || i.level > max_level_) return false;
    if (leaf_keys_.empty()) return true;
    DyadicInterval a = i;
    while (a.level > top_.level) {
        a = parent(a);
        if (is_leaf(a)) return false;
    }
    return true;
}

bool Tree::is_interior(const DyadicInterval& i) const {
    return i.level < max_level_ && !is_leaf(i) && contains(i);
}

void Tree::for_each_member(const std::function<void(const DyadicInterval&)>& f) const {
    std::vector<DyadicInterval> stack{top_};
    while (!stack.empty()) {
        const DyadicInterval i = stack.back();
        stack.pop_back();
        f(i);
        if (i.level < max_level_ && !is_leaf(i)) {
            stack.push_back(right_child(i));
            stack.push_back(left_child(i));
        }
    }
}

std::vector<DyadicInterval> Tree::members() const {
    std::vector<DyadicInterval> out;
    for_each_member([&](const DyadicInterval& i) { out.push_back(i); });
    return out;
}

std::vector<DyadicInterval> Tree::frontier() const {
    std::vector<DyadicInterval> out;
    for_each_member([&](const DyadicInterval& i) {
        if (i.level == max_level_ && !is_leaf(i)) out.push_back(i);
    });
    return out;
}

std::size_t Tree::size() const {
    std::size_t n = 0;
    for_each_member([&](const DyadicInterval&) { ++n; });
    return n;
}

double Tree::boundary_mass(const Measure& mu) const {
    double m = mu.mass(top_.left(), top_.right());
    for (const DyadicInterval& l : leaves_) m -= mu.mass(l.left(), l.right());
    return std::max(m, 0.0);
}

bool Tree::verify(std::string* why) const {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    for (std::size_t k = 1; k < leaves_.size(); ++k) {
        if (leaves_[k].left() < leaves_[k - 1].right()) return fail("overlapping leaves");
    }
    bool ok = true;
    std::string msg;
    for_each_member([&](const DyadicInterval& i) {
        if (!ok) return;
        for (DyadicInterval a = i; a.level > top_.level;) {
            a = parent(a);
            if (!contains(a)) {
                ok = false;
                msg = "coherence fails above " + i.to_string();
                return;
            }
        }
        int children = 0;
        if (i.level < max_level_) children = contains(left_child(i)) + contains(right_child(i));
        if (children == 1) {
            ok = false;
            msg = "one child in tree at " + i.to_string();
        }
        if (is_leaf(i) && children != 0) {
            ok = false;
            msg = "leaf with children " + i.to_string();
        }
    });
    return ok ? true : fail(msg);
}

nlohmann::json Tree::to_json() const {
    nlohmann::json leaves = nlohmann::json::array();
    std::map<int, int> hist;
    for (const DyadicInterval& l : leaves_) {
        leaves.push_back(l.to_string());
        ++hist[l.level];
    }
    nlohmann::json depth = nlohmann::json::object();
    for (const auto& [lvl, n] : hist) depth[std::to_string(lvl)] = n;
    return {{"top", top_.to_string()},
            {"max_level", max_level_},
            {"null_top", null_top_},
            {"leaves", leaves},
            {"leaf_depth_histogram", depth}};
}

int Forest::tree_of(const DyadicInterval& i) const {
    for (std::size_t t = 0; t < trees.size(); ++t) {
        if (trees[t].contains(i)) return static_cast<int>(t);
    }
    return -1;
}

nlohmann::json Forest::to_json() const {
    nlohmann::json ts = nlohmann::json::array();
    for (const Tree& t : trees) ts.push_back(t.to_json());
    return {{"epsilon", epsilon},
            {"mode", mode == StoppingMode::interval ? "interval" : "ball"},
            {"max_level", max_level},
            {"trees", ts}};
}

namespace {

double stopping_term(AlphaTable& table, const DyadicInterval& i, StoppingMode mode) {
    if (mode == StoppingMode::interval) {
        const double a = table.alpha(i);
        return a * a;
    }
    // Intervals missing spt mu use B_I = I.
    if (!(table.mu().mass(i.left(), i.right(), true) > 0.0)) {
        const double a = table.smooth(i).value;
        return a * a;
    }
    const double a = table.ball(i).alpha_s;
    return a * a;
}

}  // namespace

double stopping_sum(AlphaTable& table, const Tree& tree, const DyadicInterval& i, StoppingMode mode) {
    double s = 0.0;
    for (DyadicInterval a = i;; a = parent(a)) {
        s += stopping_term(table, a, mode);
        if (a.level == tree.top().level) break;
    }
    return s;
}

Forest stopping_forest(AlphaTable& table, double epsilon, int max_level, StoppingMode mode) {
    if (!(epsilon > 0.0)) throw ParameterError("epsilon must be positive");
    if (max_level < 0 || max_level > 30) throw ParameterError("forest max_level must lie in [0, 30]");
    if (table.system().kind() != DyadicSystem::Kind::standard) {
        throw ParameterError("stopping forests use the standard system");
    }
    const Measure& mu = table.mu();
    const Measure& nu = table.nu();
    const double eps2 = epsilon * epsilon;
    Forest f;
    f.epsilon = epsilon;
    f.mode = mode;
    f.max_level = max_level;
    std::deque<DyadicInterval> tops{DyadicInterval{}};
    while (!tops.empty()) {
        const DyadicInterval top = tops.front();
        tops.pop_front();
        if (mu.mass(top.left(), top.right()) == 0.0) {
            f.trees.emplace_back(top, max_level, std::vector<DyadicInterval>{}, true);
            continue;
        }
        std::vector<DyadicInterval> leaves;
        std::vector<std::pair<DyadicInterval, double>> stack{{top, 0.0}};
        while (!stack.empty()) {
            const auto [i, above] = stack.back();
            stack.pop_back();
            if (!(nu.mass(i.left(), i.right()) > 0.0)) {
                throw PreconditionError("nu vanishes on " + i.to_string() + "; nu is not doubling");
            }
            const double s = above + stopping_term(table, i, mode);
            if (s >= eps2) {
                leaves.push_back(i);
                if (i.level < max_level) {
                    tops.push_back(left_child(i));
                    tops.push_back(right_child(i));
                }
            } else if (i.level < max_level) {
                stack.push_back({right_child(i), s});
                stack.push_back({left_child(i), s});
            }
        }
        f.trees.emplace_back(top, max_level, std::move(leaves));
    }
    return f;
}

TreeDoublingReport tree_doubling_check(const Measure& mu, const Tree& tree, double d) {
    TreeDoublingReport r;
    r.worst = tree.top();
    tree.for_each_member([&](const DyadicInterval& i) {
        if (i == tree.top()) return;
        ++r.checked;
        const double mp = mu.mass(parent(i).left(), parent(i).right());
        const double m = mu.mass(i.left(), i.right());
        double ratio = 0.0;
        if (mp > 0.0) ratio = m > 0.0 ? mp / m : INFINITY;
        if (ratio > r.worst_ratio) {
            r.worst_ratio = ratio;
            r.worst = i;
        }
    });
    r.passes = r.worst_ratio <= d * (1.0 + 1e-12);
    return r;
}

Measure adapted_measure(const Measure& nu, const Measure& mu, const Tree& tree) {
    std::vector<Atom> atoms;
    std::vector<Piece> pieces;
    auto take = [&](const Measure& m) {
        atoms.insert(atoms.end(), m.atoms().begin(), m.atoms().end());
        pieces.insert(pieces.end(), m.pieces().begin(), m.pieces().end());
    };
    double cursor = tree.top().left();
    for (const DyadicInterval& l : tree.leaves()) {
        if (l.left() > cursor) take(nu.restrict(cursor, l.left()));
        const double ml = mu.mass(l.left(), l.right());
        if (!(ml > 0.0)) throw DomainError("mu vanishes on leaf " + l.to_string());
        take(mu.restrict(l.left(), l.right()).scaled(nu.mass(l.left(), l.right()) / ml));
        cursor = l.right();
    }
    if (tree.top().right() > cursor) take(nu.restrict(cursor, tree.top().right()));
    return Measure(std::move(atoms), std::move(pieces));
}

HaarSystem::HaarSystem(const Measure& mu, const Measure& nu, Tree tree)
    : mu_(&mu), nu_(&nu), tree_(std::move(tree)) {
    const DyadicInterval& t = tree_.top();
    mu_top_ = mu.mass(t.left(), t.right());
    nu_top_ = nu.mass(t.left(), t.right());
    if (!(mu_top_ > 0.0 && nu_top_ > 0.0)) throw DomainError("Haar analysis needs positive mass on the top");
    tree_.for_each_member([&](const DyadicInterval& i) {
        if (!tree_.is_interior(i)) return;
        const DyadicInterval l = left_child(i);
        const DyadicInterval r = right_child(i);
        HaarCoefficient c;
        c.mu = mu_mass(i);
        c.mu_minus = mu_mass(l);
        c.mu_plus = mu_mass(r);
        const double n = nu_mass(i);
        const double nm = nu_mass(l);
        const double np = nu_mass(r);
        if (!(c.mu > 0.0 && c.mu_minus > 0.0 && c.mu_plus > 0.0 && n > 0.0)) {
            throw DomainError("zero mass on tree member " + i.to_string());
        }
        c.c_plus = c.mu / c.mu_plus;
        c.c_minus = c.mu / c.mu_minus;
        c.a = c.mu_minus / c.mu - nm / n;
        c.a_plus = np / n - c.mu_plus / c.mu;
        c.h_norm_sq = c.mu * c.mu / c.mu_plus + c.mu * c.mu / c.mu_minus;
        coef_.emplace(i.key(), c);
        order_.push_back(i);
    });
}

double HaarSystem::mu_mass(const DyadicInterval& i) const { return mu_->mass(i.left(), i.right()) / mu_top_; }
double HaarSystem::nu_mass(const DyadicInterval& i) const { return nu_->mass(i.left(), i.right()) / nu_top_; }

const HaarCoefficient* HaarSystem::coefficient(const DyadicInterval& i) const {
    auto it = coef_.find(i.key());
    return it == coef_.end() ? nullptr : &it->second;
}

std::vector<DyadicInterval> HaarSystem::intervals() const { return order_; }

double HaarSystem::h(const DyadicInterval& i, double x) const {
    const HaarCoefficient* c = coefficient(i);
    if (!c || x < i.left() || x >= i.right()) return 0.0;
    return x < 0.5 * (i.left() + i.right()) ? -c->c_minus : c->c_plus;
}

double HaarSystem::h_on(const DyadicInterval& i, const DyadicInterval& j) const {
    const HaarCoefficient* c = coefficient(i);
    if (!c || j.level <= i.level || !sqfn::contains(i, j)) return 0.0;
    return sqfn::contains(left_child(i), j) ? -c->c_minus : c->c_plus;
}

double HaarSystem::mean(const DyadicInterval& i) const {
    const HaarCoefficient* c = coefficient(i);
    if (!c) return 0.0;
    return c->c_plus * c->mu_plus - c->c_minus * c->mu_minus;
}

double HaarSystem::inner(const DyadicInterval& i, const DyadicInterval& j) const {
    if (i == j) {
        const HaarCoefficient* c = coefficient(i);
        return c ? c->h_norm_sq : 0.0;
    }
    if (sqfn::contains(i, j)) return h_on(i, j) * mean(j);
    if (sqfn::contains(j, i)) return h_on(j, i) * mean(i);
    return 0.0;
}

ProductCheck product_check(const HaarSystem& h, const DyadicInterval& i) {
    const Tree& t = h.tree();
    if (!t.contains(i)) throw DomainError(i.to_string() + " is not a tree member");
    ProductCheck p;
    for (DyadicInterval a = i; a.level > t.top().level;) {
        a = parent(a);
        const HaarCoefficient* c = h.coefficient(a);
        if (c) p.lhs *= 1.0 + c->a * h.h_on(a, i);
    }
    p.rhs = h.nu_mass(i) / h.mu_mass(i);
    return p;
}

double partial_sum_g(const HaarSystem& h, double x, int n) {
    const Tree& t = h.tree();
    if (x < t.top().left() || x >= t.top().right()) return 0.0;
    double g = 0.0;
    DyadicInterval j = t.top();
    while (j.level < n) {
        const HaarCoefficient* c = h.coefficient(j);
        if (!c) break;
        g += c->a * h.h(j, x);
        j = x < 0.5 * (j.left() + j.right()) ? left_child(j) : right_child(j);
    }
    return g;
}

GNorm g_l2_norm(const HaarSystem& h, int n) {
    GNorm out;
    for (const DyadicInterval& i : h.intervals()) {
        if (i.level >= n) continue;
        const HaarCoefficient* c = h.coefficient(i);
        out.orthogonal += c->a * c->a * c->h_norm_sq;
        const double cm = std::max(c->c_plus, c->c_minus);
        out.max_h_ratio = std::max(out.max_h_ratio, c->h_norm_sq / (cm * cm * c->mu));
    }
    std::vector<std::pair<DyadicInterval, double>> stack{{h.tree().top(), 0.0}};
    while (!stack.empty()) {
        const auto [j, v] = stack.back();
        stack.pop_back();
        const HaarCoefficient* c = h.coefficient(j);
        if (c && j.level < n) {
            stack.push_back({left_child(j), v - c->a * c->c_minus});
            stack.push_back({right_child(j), v + c->a * c->c_plus});
        } else {
            out.quadrature += v * v * h.mu_mass(j);
        }
    }
    return out;
}

}  // namespace sqfn
