#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sqfn/measure.hpp"

namespace sqfn {

inline constexpr int kMaxLevel = 60;
inline constexpr int kInfinite = std::numeric_limits<int>::max();

struct DyadicInterval {
    int system = 0;
    int level = 0;
    std::int64_t index = 0;

    auto operator<=>(const DyadicInterval&) const = default;

    double length() const;
    // Endpoints in the standard system; shifted systems use DyadicSystem::window.
    double left() const;
    double right() const;
    std::uint64_t key() const;
    std::string to_string() const;
    static DyadicInterval parse(std::string_view text);
};

// Standard-system navigation.
DyadicInterval parent(const DyadicInterval& i);
DyadicInterval left_child(const DyadicInterval& i);
DyadicInterval right_child(const DyadicInterval& i);
DyadicInterval minus_chain(const DyadicInterval& i, int k);
DyadicInterval plus_chain(const DyadicInterval& i, int k);
bool contains(const DyadicInterval& outer, const DyadicInterval& inner);
// Level-`level` interval of the standard system containing x.
DyadicInterval locate(double x, int level);

enum class StepKind { parent, left, right, minus_chain, plus_chain };
struct Step {
    StepKind kind = StepKind::left;
    int k = 1;
};
DyadicInterval navigate(const DyadicInterval& i, Step step);

// Dyadic system given by per-level shifts s_j in [0, 2^-j); level-j
// intervals are [s_j + k 2^-j, s_j + (k+1) 2^-j), read periodically mod 1
// unless the system is standard.
class DyadicSystem {
public:
    enum class Kind { standard, shifted, generalized };

    static DyadicSystem standard(int max_level = kMaxLevel);
    // sign = +1: s_j = (-1)^j / (3 2^j); sign = -1: the mirrored table.
    static DyadicSystem one_third(int sign, int id, int max_level = 40);
    static DyadicSystem generalized(std::vector<double> shifts, int id);

    Kind kind() const { return kind_; }
    int id() const { return id_; }
    int max_level() const { return static_cast<int>(shifts_.size()) - 1; }
    double shift(int level) const { return shifts_.at(static_cast<std::size_t>(level)); }

    DyadicInterval root() const { return DyadicInterval{id_, 0, 0}; }
    Window window(const DyadicInterval& i) const;
    DyadicInterval parent(const DyadicInterval& i) const;
    DyadicInterval child(const DyadicInterval& i, int side) const;  // side 0: left, 1: right
    DyadicInterval locate(double x, int level) const;
    // Smallest interval of this system with left <= a and b <= right.
    std::optional<DyadicInterval> cover(double a, double b) const;

    // (D1) partitions, (D2) lengths, (D3) two children each, checked up to `levels`.
    bool verify(int levels, std::string* why = nullptr) const;

private:
    DyadicSystem(Kind kind, int id, std::vector<double> shifts);

    Kind kind_ = Kind::standard;
    int id_ = 0;
    std::vector<double> shifts_;
    std::vector<std::int64_t> offsets_;  // (s_j - s_{j+1}) 2^{j+1}
};

std::vector<DyadicSystem> shifted_systems(int count);

struct Cover {
    DyadicInterval interval;
    int system_index = 0;  // position in the list passed to best_cover
    double ratio = 0.0;    // |J| / (b - a)
};
std::optional<Cover> best_cover(const std::vector<DyadicSystem>& systems, double a, double b);

double delta(const Measure& mu, const Measure& nu, const DyadicInterval& i,
             const DyadicSystem& system = DyadicSystem::standard());
double delta(const Measure& mu, const Measure& nu, const Window& w);

struct DoublingReport {
    double constant = 1.0;
    DyadicInterval worst;
    int depth = 0;
    bool finite = true;
};
DoublingReport doubling_constant(const Measure& nu, const DyadicSystem& system, int depth);

struct TailTip {
    std::vector<DyadicInterval> tail;
    std::vector<DyadicInterval> tip;
    bool degenerate = false;
    bool minus_infinite = false;
    bool plus_infinite = false;
    int truncated_at = -1;  // level where infinite chains were cut, -1 if none
};
// Infinite chains are truncated at max_level and then have no tip part.
TailTip tail_tip(const DyadicInterval& i, int n1, int n2, int max_level = 30);

}  // namespace sqfn
