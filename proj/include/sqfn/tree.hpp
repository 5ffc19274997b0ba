#pragma once

#include <functional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "sqfn/alpha.hpp"
#include "sqfn/dyadic.hpp"
#include "sqfn/measure.hpp"

namespace sqfn {

// Coherent family of standard dyadic intervals below `top`, cut at `max_level`.
// I belongs to the tree iff I is inside top, level(I) <= max_level and no
// leaf strictly contains I. Members at max_level that are not leaves form
// the frontier, the finite-depth stand-in for the boundary.
class Tree {
public:
    Tree() = default;
    Tree(DyadicInterval top, int max_level, std::vector<DyadicInterval> leaves, bool null_top = false);
    // All descendants of top down to `levels` levels (top included).
    static Tree full(DyadicInterval top, int levels);

    const DyadicInterval& top() const { return top_; }
    int max_level() const { return max_level_; }
    const std::vector<DyadicInterval>& leaves() const { return leaves_; }
    bool null_top() const { return null_top_; }

    bool contains(const DyadicInterval& i) const;
    bool is_leaf(const DyadicInterval& i) const;
    // Member with both children in the tree.
    bool is_interior(const DyadicInterval& i) const;

    void for_each_member(const std::function<void(const DyadicInterval&)>& f) const;
    std::vector<DyadicInterval> members() const;
    std::vector<DyadicInterval> frontier() const;
    std::size_t size() const;

    // mu(top) minus the mass of the leaves.
    double boundary_mass(const Measure& mu) const;

    // Coherence and child-count invariants, by exhaustive walk.
    bool verify(std::string* why = nullptr) const;

    nlohmann::json to_json() const;

private:
    DyadicInterval top_;
    int max_level_ = 0;
    std::vector<DyadicInterval> leaves_;
    std::unordered_set<std::uint64_t> leaf_keys_;
    bool null_top_ = false;
};

enum class StoppingMode { interval, ball };

struct Forest {
    std::vector<Tree> trees;
    double epsilon = 0.0;
    StoppingMode mode = StoppingMode::interval;
    int max_level = 0;

    // Tree containing the member I (by its top chain); -1 if none.
    int tree_of(const DyadicInterval& i) const;
    nlohmann::json to_json() const;
};

// Stopping-time forest: I becomes a leaf when the alpha^2 sum from its top
// down to I reaches epsilon^2; children of leaves start new trees; tops with
// mu = 0 get non-stopping trees.
Forest stopping_forest(AlphaTable& table, double epsilon, int max_level, StoppingMode mode = StoppingMode::interval);
// alpha^2 (or ball alpha_s^2) summed over J with I in J in top(tree).
double stopping_sum(AlphaTable& table, const Tree& tree, const DyadicInterval& i,
                    StoppingMode mode = StoppingMode::interval);

struct TreeDoublingReport {
    double worst_ratio = 1.0;
    DyadicInterval worst;
    std::size_t checked = 0;
    bool passes = true;
};
TreeDoublingReport tree_doubling_check(const Measure& mu, const Tree& tree, double d);

// nu on the boundary plus (nu/mu)(L) mu on every leaf L.
Measure adapted_measure(const Measure& nu, const Measure& mu, const Tree& tree);

struct HaarCoefficient {
    double a = 0.0;        // mu(I-)/mu(I) - nu(I-)/nu(I)
    double a_plus = 0.0;   // nu(I+)/nu(I) - mu(I+)/mu(I)
    double c_plus = 0.0;   // mu(I)/mu(I+)
    double c_minus = 0.0;  // mu(I)/mu(I-)
    double mu = 0.0;       // normalized masses of I, I-, I+
    double mu_minus = 0.0;
    double mu_plus = 0.0;
    double h_norm_sq = 0.0;  // integral of h_I^2 d mu
};

// mu-adapted Haar analysis of nu on a tree, with mu(top) = nu(top) = 1.
class HaarSystem {
public:
    HaarSystem(const Measure& mu, const Measure& nu, Tree tree);

    const Tree& tree() const { return tree_; }
    const HaarCoefficient* coefficient(const DyadicInterval& i) const;
    std::size_t size() const { return coef_.size(); }
    // h_I^mu(x).
    double h(const DyadicInterval& i, double x) const;
    // Value of h_I on the subinterval J (0 if J is outside I or J = I not inside a child).
    double h_on(const DyadicInterval& i, const DyadicInterval& j) const;
    // Normalized masses.
    double mu_mass(const DyadicInterval& i) const;
    double nu_mass(const DyadicInterval& i) const;
    // integral of h_I h_J d mu, from masses.
    double inner(const DyadicInterval& i, const DyadicInterval& j) const;
    // integral of h_I d mu.
    double mean(const DyadicInterval& i) const;

    std::vector<DyadicInterval> intervals() const;

private:
    const Measure* mu_;
    const Measure* nu_;
    Tree tree_;
    double mu_top_ = 1.0;
    double nu_top_ = 1.0;
    std::unordered_map<std::uint64_t, HaarCoefficient> coef_;
    std::vector<DyadicInterval> order_;
};

struct ProductCheck {
    double lhs = 1.0;
    double rhs = 1.0;
};
// Product of (1 + a_J h_J) over tree members J strictly containing I,
// against (nu/mu)(I).
ProductCheck product_check(const HaarSystem& h, const DyadicInterval& i);
// g_N(x) = sum over I with |I| > 2^-N of a_I h_I(x).
double partial_sum_g(const HaarSystem& h, double x, int n);

struct GNorm {
    double orthogonal = 0.0;  // sum a_I^2 ||h_I||^2
    double quadrature = 0.0;  // integral of g_N^2 d mu over the level-N partition
    double max_h_ratio = 0.0;  // max ||h_I||^2 / (max(c+, c-)^2 mu(I))
};
GNorm g_l2_norm(const HaarSystem& h, int n);

}  // namespace sqfn
