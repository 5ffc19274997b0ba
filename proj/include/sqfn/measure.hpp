#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sqfn/errors.hpp"

namespace sqfn {

// Continuous piecewise-linear function given by values at strictly increasing
// breakpoints, zero outside [front, back].
class PiecewiseLinearFn {
public:
    PiecewiseLinearFn() = default;
    PiecewiseLinearFn(std::vector<double> xs, std::vector<double> ys);

    // 0 at a, h on [b, c], 0 at d.
    static PiecewiseLinearFn trapezoid(double a, double b, double c, double d, double h = 1.0);
    // dist(x, R \ (a, b)); the default is the weight phi on (0, 1).
    static PiecewiseLinearFn tent(double a = 0.0, double b = 1.0);

    double operator()(double x) const;

    const std::vector<double>& breakpoints() const { return xs_; }
    const std::vector<double>& values() const { return ys_; }
    bool empty() const { return xs_.empty(); }

    double lipschitz() const;
    double sup_norm() const;

    PiecewiseLinearFn scaled(double s) const;
    // x -> f((x - a) / (b - a)), i.e. f transported from [0,1] onto [a,b].
    PiecewiseLinearFn transported(double a, double b) const;
    // Pointwise sum; both operands must vanish at their end breakpoints.
    PiecewiseLinearFn operator+(const PiecewiseLinearFn& other) const;

private:
    std::vector<double> xs_;
    std::vector<double> ys_;
};

struct Atom {
    double position = 0.0;
    double weight = 0.0;
};

// Uniform density mass / (right - left) on [left, right).
struct Piece {
    double left = 0.0;
    double right = 0.0;
    double mass = 0.0;
    double density() const { return mass / (right - left); }
};

enum class Extension { zero, periodic };

// Half-open interval [left, right). With periodic extension the measure is
// read through x -> x mod 1, which shifted dyadic systems need near 1.
struct Window {
    double left = 0.0;
    double right = 1.0;
    Extension extension = Extension::zero;
    double length() const { return right - left; }
};

namespace detail {

// Bottom-up segment tree of nonnegative terms; range sums never cancel.
class RangeSum {
public:
    RangeSum() = default;
    explicit RangeSum(const std::vector<double>& terms);
    double sum(std::size_t lo, std::size_t hi) const;  // [lo, hi)

private:
    std::size_t n_ = 0;
    std::vector<double> tree_;
};

}  // namespace detail

class Measure {
public:
    Measure() = default;
    Measure(std::vector<Atom> atoms, std::vector<Piece> pieces);

    static Measure lebesgue();
    static Measure dirac(double x, double weight = 1.0);
    static Measure uniform(double a, double b, double mass);
    // Cell k of level `depth` carries masses[k], uniformly spread.
    static Measure histogram(int depth, const std::vector<double>& masses);

    const std::vector<Atom>& atoms() const { return atoms_; }
    const std::vector<Piece>& pieces() const { return pieces_; }
    double total() const { return total_; }
    bool is_zero() const { return total_ == 0.0; }

    double mass(double a, double b, bool closed_right = false) const;
    double mass(const Window& w) const;
    double integrate(const PiecewiseLinearFn& f) const;

    // True if all mass sits in [a, b].
    bool supported_in(double a, double b) const;

    Measure restrict(double a, double b) const;
    Measure restrict(const Window& w) const;
    // Pushforward of the restriction to [a, b) under x -> (x - a) / (b - a).
    Measure blowup(double a, double b) const;
    Measure blowup(const Window& w) const;
    Measure scaled(double s) const;
    Measure normalized() const;
    Measure operator+(const Measure& other) const;

    // Atom positions lying on a dyadic boundary of level <= max_level.
    std::vector<double> boundary_atoms(int max_level) const;

    nlohmann::json to_json() const;
    static Measure from_json(const nlohmann::json& j);

private:
    double mass_halfopen(double a, double b) const;
    double atom_mass(double a, double b, bool closed_right) const;
    double piece_mass(double a, double b) const;

    std::vector<Atom> atoms_;
    std::vector<Piece> pieces_;
    std::vector<double> atom_pos_;
    std::vector<double> piece_right_;
    std::vector<double> piece_left_;
    detail::RangeSum atom_sum_;
    detail::RangeSum piece_sum_;
    double total_ = 0.0;
};

struct LebesgueSpec {};
struct AtomicSpec {
    std::vector<Atom> atoms;
};
struct HistogramSpec {
    int depth = 0;
    std::vector<double> masses;
};
// Multiplicative cascade: node (j, k) sends fraction p (or its override) of
// its mass to the left child.
struct CascadeSpec {
    double p = 0.5;
    int depth = 0;
    std::map<std::pair<int, std::int64_t>, double> fractions;
};
// Each interval keeps its two end subintervals with the given length ratios,
// half the mass each, and drops the gap.
struct CantorSpec {
    double left_ratio = 1.0 / 3.0;
    double right_ratio = 1.0 / 3.0;
    int depth = 0;
};
struct Example22Spec {
    int n = 3;
};
struct Example52Spec {
    int n = 3;
};
enum class Example53Side { mu, nu };
struct Example53Spec {
    double epsilon = 0.1;
    Example53Side side = Example53Side::mu;
};

using MeasureSpec = std::variant<LebesgueSpec, AtomicSpec, HistogramSpec, CascadeSpec, CantorSpec,
                                 Example22Spec, Example52Spec, Example53Spec>;

inline constexpr int kMaxGeneratorDepth = 30;

void validate(const MeasureSpec& spec);
Measure generate(const MeasureSpec& spec);
std::string spec_type(const MeasureSpec& spec);
// Finest dyadic level on which the generated measure is exact (0 if unbounded).
int spec_depth(const MeasureSpec& spec);

nlohmann::json to_json(const MeasureSpec& spec);
MeasureSpec spec_from_json(const nlohmann::json& j);

}  // namespace sqfn
