#include "sqfn/squarefn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <thread>

#include "sqfn/transport.hpp"

namespace sqfn {

namespace {

// Runs f(i) for i in [0, n) on worker_threads() threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f) {
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(worker_threads()), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) f(i);
        });
    }
    for (std::thread& t : pool) t.join();
}

double cell_mass(const Measure& m, const DyadicInterval& i) { return m.mass(i.left(), i.right()); }

bool on_boundary(const DyadicSystem& system, double x, int depth) {
    for (int j = 0; j <= depth; ++j) {
        const double u = std::ldexp(x - system.shift(j), j);
        if (u == std::floor(u)) return true;
    }
    return false;
}

}  // namespace

int worker_threads() {
    if (const char* env = std::getenv("SQFNLAB_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<double> SquareFunctionProfile::mean() const {
    std::vector<double> out(scales.size(), 0.0);
    if (partial_sums.empty()) return out;
    for (const auto& row : partial_sums) {
        for (std::size_t m = 0; m < row.size(); ++m) out[m] += row[m];
    }
    for (double& v : out) v /= static_cast<double>(partial_sums.size());
    return out;
}

nlohmann::json SquareFunctionProfile::to_json() const {
    nlohmann::json j;
    j["mode"] = mode == Mode::dyadic ? "dyadic" : "continuous";
    j["points"] = points;
    j["scales"] = scales;
    j["mean"] = mean();
    j["boundary_points"] = boundary_points;
    if (mode == Mode::continuous) j["nodes_per_octave"] = nodes_per_octave;
    return j;
}

std::string SquareFunctionProfile::to_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "point," << (mode == Mode::dyadic ? "depth" : "r") << ",partial_sum\n";
    for (std::size_t p = 0; p < points.size(); ++p) {
        for (std::size_t m = 0; m < scales.size(); ++m) {
            out << points[p] << ',' << scales[m] << ',' << partial_sums[p][m] << '\n';
        }
    }
    return out.str();
}

std::vector<double> sample_points(const Measure& mu, int depth, int count, std::uint64_t seed) {
    if (mu.is_zero()) throw DomainError("cannot sample points from the zero measure");
    if (depth < 0 || depth > kMaxLevel - 1) throw ParameterError("sample depth out of range");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int n = 0; n < count; ++n) {
        DyadicInterval i{};
        double m = cell_mass(mu, i);
        for (int j = 0; j < depth; ++j) {
            const DyadicInterval l = left_child(i);
            const double ml = cell_mass(mu, l);
            if (unit(rng) * m < ml) {
                i = l;
                m = ml;
            } else {
                i = right_child(i);
                m = cell_mass(mu, i);
            }
        }
        out.push_back(0.5 * (i.left() + i.right()));
    }
    return out;
}

SquareFunctionProfile dyadic_square_profile(AlphaTable& table, const std::vector<double>& points, int depth) {
    const DyadicSystem& system = table.system();
    if (depth < 0 || depth > system.max_level()) throw ParameterError("profile depth exceeds the system's max level");
    SquareFunctionProfile p;
    p.mode = SquareFunctionProfile::Mode::dyadic;
    p.points = points;
    for (int l = 0; l <= depth; ++l) p.scales.push_back(l);
    p.partial_sums.assign(points.size(), std::vector<double>(static_cast<std::size_t>(depth) + 1, 0.0));
    parallel_for(points.size(), [&](std::size_t k) {
        double acc = 0.0;
        for (int l = 0; l <= depth; ++l) {
            const double a = table.alpha(system.locate(points[k], l));
            acc += a * a;
            p.partial_sums[k][static_cast<std::size_t>(l)] = acc;
        }
    });
    for (double x : points) {
        if (on_boundary(system, x, depth)) p.boundary_points.push_back(x);
    }
    return p;
}

SquareFunctionProfile continuous_square_profile(const Measure& mu, const Measure& nu, const std::vector<double>& points,
                                                double r_min, int pts_per_octave) {
    if (!(r_min > 0.0 && r_min < 1.0)) throw ParameterError("r_min must lie in (0, 1)");
    if (pts_per_octave < 1 || pts_per_octave > 64) throw ParameterError("pts_per_octave must lie in [1, 64]");
    constexpr int kFine = 64;
    const double octaves = std::log2(1.0 / r_min);
    const int whole = static_cast<int>(std::floor(octaves));
    const int last = static_cast<int>(std::floor(octaves * kFine));  // fine index of the last node <= octaves

    // f(u) = alpha_s^2(B(x, 2^-u)) on the fine grid u = i / kFine, plus u = octaves.
    std::vector<std::vector<double>> fine(points.size(), std::vector<double>(static_cast<std::size_t>(last) + 1, -1.0));
    std::vector<double> tail(points.size(), -1.0);
    auto f = [&](std::size_t k, double u) {
        const double r = std::exp2(-u);
        const double a = alpha_smooth(mu, nu, Window{points[k] - r, points[k] + r}).value;
        return a * a;
    };

    SquareFunctionProfile p;
    p.mode = SquareFunctionProfile::Mode::continuous;
    p.points = points;
    for (int m = 0; m <= whole; ++m) p.scales.push_back(std::exp2(-m));
    if (octaves > whole) p.scales.push_back(r_min);

    auto integrate = [&](int n) {
        const int stride = kFine / n;
        parallel_for(points.size(), [&](std::size_t k) {
            auto& row = fine[k];
            for (int i = 0; i <= last; i += stride) {
                if (row[static_cast<std::size_t>(i)] < 0.0) row[static_cast<std::size_t>(i)] = f(k, double(i) / kFine);
            }
            if (tail[k] < 0.0) tail[k] = f(k, octaves);
        });
        std::vector<std::vector<double>> sums(points.size());
        for (std::size_t k = 0; k < points.size(); ++k) {
            std::vector<double>& out = sums[k];
            out.push_back(0.0);
            double acc = 0.0;
            int prev = 0;
            for (int i = stride; i <= last; i += stride) {
                acc += 0.5 * (fine[k][static_cast<std::size_t>(prev)] + fine[k][static_cast<std::size_t>(i)]) * stride / kFine;
                prev = i;
                if (i % kFine == 0) out.push_back(acc * std::log(2.0));
            }
            const double du = octaves - double(prev) / kFine;
            if (du > 0.0) {
                acc += 0.5 * (fine[k][static_cast<std::size_t>(prev)] + tail[k]) * du;
                out.push_back(acc * std::log(2.0));
            }
        }
        return sums;
    };

    int n = pts_per_octave;
    while (kFine % n != 0) ++n;
    auto coarse = integrate(n);
    while (n < kFine) {
        auto refined = integrate(2 * n);
        double worst = 0.0;
        for (std::size_t k = 0; k < points.size(); ++k) {
            const double a = coarse[k].back();
            const double b = refined[k].back();
            if (std::abs(b) > 1e-14) worst = std::max(worst, std::abs(a - b) / std::abs(b));
        }
        coarse = std::move(refined);
        n *= 2;
        if (worst < 0.01) break;
    }
    p.nodes_per_octave = n;
    p.partial_sums = std::move(coarse);
    return p;
}

double profile_slope(const SquareFunctionProfile& p, int from, int to) {
    const std::vector<double> m = p.mean();
    if (from < 0 || to >= static_cast<int>(m.size()) || to <= from) throw ParameterError("bad slope range");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = to - from + 1;
    for (int i = from; i <= to; ++i) {
        sx += i;
        sy += m[static_cast<std::size_t>(i)];
        sxx += double(i) * i;
        sxy += i * m[static_cast<std::size_t>(i)];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

double coefficient_sq(AlphaTable& table, const DyadicInterval& i, Coefficient which) {
    const double c = which == Coefficient::alpha ? table.alpha(i) : table.delta(i);
    return c * c;
}

// Sum of c^2 mu over the subtree of i with level < depth; records ratios of
// intervals at level <= ratio_level.
double subtree_sum(AlphaTable& table, const DyadicInterval& i, Coefficient which, int depth, int ratio_level,
                   double* best) {
    if (i.level >= depth) return 0.0;
    const DyadicSystem& s = table.system();
    const double m = table.mu().mass(s.window(i));
    if (m == 0.0) return 0.0;
    double sum = coefficient_sq(table, i, which) * m;
    sum += subtree_sum(table, s.child(i, 0), which, depth, ratio_level, best);
    sum += subtree_sum(table, s.child(i, 1), which, depth, ratio_level, best);
    if (best && i.level <= ratio_level) *best = std::max(*best, sum / m);
    return sum;
}

}  // namespace

double carleson_sum(AlphaTable& table, const DyadicInterval& j, Coefficient which, int depth) {
    if (depth > 30) throw ParameterError("carleson_sum depth capped at 30");
    return subtree_sum(table, j, which, depth, -1, nullptr);
}

double buckley_ratio(AlphaTable& table, Coefficient which, int depth) {
    if (depth > 30) throw ParameterError("buckley_ratio depth capped at 30");
    double best = 0.0;
    subtree_sum(table, table.system().root(), which, depth, depth / 2, &best);
    return best;
}

Measure density_measure(const HistogramDensity& g, const Measure& nu) {
    if (g.depth < 0 || g.depth > 24) throw ParameterError("density depth must lie in [0, 24]");
    if (g.values.size() != (std::size_t{1} << g.depth)) throw ParameterError("density needs 2^depth values");
    std::vector<Atom> atoms;
    std::vector<Piece> pieces;
    const double len = std::ldexp(1.0, -g.depth);
    for (std::size_t k = 0; k < g.values.size(); ++k) {
        const double v = g.values[k];
        if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("density values must be finite and nonnegative");
        if (v == 0.0) continue;
        const Measure part = nu.restrict(k * len, (k + 1) * len).scaled(v);
        atoms.insert(atoms.end(), part.atoms().begin(), part.atoms().end());
        pieces.insert(pieces.end(), part.pieces().begin(), part.pieces().end());
    }
    return Measure(std::move(atoms), std::move(pieces));
}

TolsaL2 tolsa_l2(const HistogramDensity& g, const Measure& nu, const DyadicSystem& system, int depth) {
    if (depth < 0 || depth > 20) throw ParameterError("tolsa_l2 depth must lie in [0, 20]");
    const Measure mu = density_measure(g, nu);
    AlphaTable table(mu, nu, system);
    TolsaL2 t;
    const double len = std::ldexp(1.0, -g.depth);
    for (std::size_t k = 0; k < g.values.size(); ++k) {
        t.l2norm += g.values[k] * g.values[k] * nu.mass(k * len, (k + 1) * len);
    }
    for (int j = 0; j <= depth; ++j) {
        for (std::int64_t k = 0; k < (std::int64_t{1} << j); ++k) {
            const DyadicInterval i{system.id(), j, k};
            const Window w = system.window(i);
            const double n = nu.mass(w);
            if (!(n > 0.0)) continue;
            const double m = mu.mass(w);
            if (m == 0.0) continue;
            const double a = table.alpha(i);
            t.lhs += a * a * m * m / n;
        }
    }
    t.ratio = t.l2norm > 0.0 ? t.lhs / t.l2norm : 0.0;
    return t;
}

nlohmann::json CZDecomposition::to_json() const {
    nlohmann::json j;
    j["lambda"] = lambda;
    std::vector<std::string> names;
    for (const DyadicInterval& b : bad) names.push_back(b.to_string());
    j["bad"] = names;
    j["reconstruction_error"] = reconstruction_error;
    j["max_bad_total"] = max_bad_total;
    j["nu_bad"] = nu_bad;
    j["good_density"] = good_density;
    j["doubling"] = doubling;
    j["holds"] = holds;
    return j;
}

CZDecomposition cz_decompose(const Measure& mu, const Measure& nu, double lambda, int depth) {
    if (!(lambda >= 1.0)) throw ParameterError("lambda must be >= 1");
    if (depth < 0 || depth > 16) throw ParameterError("cz_decompose depth must lie in [0, 16]");
    CZDecomposition cz;
    cz.lambda = lambda;

    std::function<void(const DyadicInterval&)> scan = [&](const DyadicInterval& i) {
        const double m = cell_mass(mu, i);
        const double n = cell_mass(nu, i);
        if (m > lambda * n) {
            if (!(n > 0.0)) throw PreconditionError("nu vanishes on the maximal bad interval " + i.to_string());
            cz.bad.push_back(i);
            cz.bad_parts.push_back({i, m, m / n});
            return;
        }
        if (i.level < depth) {
            scan(left_child(i));
            scan(right_child(i));
        }
    };
    scan(DyadicInterval{});

    std::vector<Atom> atoms;
    std::vector<Piece> pieces;
    auto append = [&](const Measure& part) {
        atoms.insert(atoms.end(), part.atoms().begin(), part.atoms().end());
        pieces.insert(pieces.end(), part.pieces().begin(), part.pieces().end());
    };
    double cursor = 0.0;
    for (const BadPart& b : cz.bad_parts) {  // scan order is left to right
        if (b.interval.left() > cursor) append(mu.restrict(cursor, b.interval.left()));
        append(nu.restrict(b.interval.left(), b.interval.right()).scaled(b.nu_multiple));
        cursor = b.interval.right();
        cz.nu_bad += cell_mass(nu, b.interval);
        cz.max_bad_total = std::max(cz.max_bad_total, std::abs(b.mu_mass - b.nu_multiple * cell_mass(nu, b.interval)));
    }
    // Atoms at 1 sit outside every dyadic cell and are kept as they are.
    append(mu.restrict(Window{cursor, 2.0}));
    cz.good = Measure(std::move(atoms), std::move(pieces));

    for (int j = 0; j <= depth; ++j) {
        for (std::int64_t k = 0; k < (std::int64_t{1} << j); ++k) {
            const DyadicInterval c{0, j, k};
            double total = cell_mass(cz.good, c);
            for (const BadPart& b : cz.bad_parts) {
                if (contains(c, b.interval)) {
                    total += b.mu_mass - b.nu_multiple * cell_mass(nu, b.interval);
                } else if (contains(b.interval, c)) {
                    total += cell_mass(mu, c) - b.nu_multiple * cell_mass(nu, c);
                }
            }
            cz.reconstruction_error = std::max(cz.reconstruction_error, std::abs(total - cell_mass(mu, c)));
            if (j == depth) {
                const double g = cell_mass(cz.good, c);
                const double n = cell_mass(nu, c);
                if (n > 0.0) cz.good_density = std::max(cz.good_density, g / n);
                else if (g > 0.0) cz.good_density = INFINITY;
            }
        }
    }
    cz.doubling = doubling_constant(nu, DyadicSystem::standard(), depth).constant;
    cz.holds = cz.reconstruction_error <= 1e-12 && cz.max_bad_total <= 1e-12 && cz.nu_bad < 1.0 / lambda &&
               cz.good_density <= cz.doubling * lambda * (1.0 + 1e-12);
    return cz;
}

MartingaleDifferences::MartingaleDifferences(const HistogramDensity& g, const Measure& nu, const DyadicInterval& i,
                                             int depth)
    : nu_(&nu), top_(i), depth_(depth) {
    if (depth < 0 || i.level + depth > 24) throw ParameterError("martingale depth out of range");
    const Measure mu = density_measure(g, nu);
    auto avg = [&](const DyadicInterval& j) {
        const double n = cell_mass(nu, j);
        if (!(n > 0.0)) throw PreconditionError("nu vanishes on " + j.to_string());
        return cell_mass(mu, j) / n;
    };
    std::function<void(const DyadicInterval&)> walk = [&](const DyadicInterval& j) {
        if (j.level >= i.level + depth) return;
        table_[j] = {avg(j), avg(left_child(j)), avg(right_child(j))};
        walk(left_child(j));
        walk(right_child(j));
    };
    walk(i);
    if (depth == 0) table_[i] = {avg(i), avg(i), avg(i)};
}

double MartingaleDifferences::average() const { return table_.at(top_).average; }

double MartingaleDifferences::value(const DyadicInterval& j, const DyadicInterval& c) const {
    auto it = table_.find(j);
    if (it == table_.end() || c.level <= j.level || depth_ == 0) return 0.0;
    if (contains(left_child(j), c)) return it->second.left_average - it->second.average;
    if (contains(right_child(j), c)) return it->second.right_average - it->second.average;
    return 0.0;
}

double MartingaleDifferences::reconstruct(const DyadicInterval& cell) const {
    if (!contains(top_, cell)) throw DomainError(cell.to_string() + " lies outside " + top_.to_string());
    double v = average();
    for (DyadicInterval j = cell; j.level > top_.level;) {
        j = parent(j);
        v += value(j, cell);
    }
    return v;
}

double MartingaleDifferences::mean(const DyadicInterval& j) const {
    auto it = table_.find(j);
    if (it == table_.end() || depth_ == 0) return 0.0;
    const MartingaleDifference& d = it->second;
    return cell_mass(*nu_, left_child(j)) * (d.left_average - d.average) +
           cell_mass(*nu_, right_child(j)) * (d.right_average - d.average);
}

double MartingaleDifferences::inner(const DyadicInterval& j, const DyadicInterval& k) const {
    if (!table_.count(j) || !table_.count(k) || depth_ == 0) return 0.0;
    if (j == k) {
        const MartingaleDifference& d = table_.at(j);
        const double l = d.left_average - d.average;
        const double r = d.right_average - d.average;
        return cell_mass(*nu_, left_child(j)) * l * l + cell_mass(*nu_, right_child(j)) * r * r;
    }
    if (contains(j, k)) return value(j, k) * mean(k);
    if (contains(k, j)) return value(k, j) * mean(j);
    return 0.0;
}

MartingaleDifferences martingale_diff(const HistogramDensity& g, const Measure& nu, const DyadicInterval& i,
                                      int depth) {
    return MartingaleDifferences(g, nu, i, depth);
}

DominationCheck domination_check(const Measure& mu, const Measure& nu, double x, double r,
                                 const std::vector<DyadicSystem>& systems) {
    if (!(r > 0.0) || x - r < 0.0 || x + r > 1.0) throw ParameterError("B(x, r) must lie in [0, 1)");
    DominationCheck d;
    d.x = x;
    d.r = r;
    const Window b{x - r, x + r};
    const SmoothAlpha sb = alpha_smooth(mu, nu, b);
    if (!(sb.nu_phi > 0.0)) throw PreconditionError("nu(phi_B) vanishes");
    d.alpha_s_sq = sb.value * sb.value;
    d.holds = true;
    for (const DyadicSystem& s : systems) {
        // A shifted root can straddle B; another system then covers it.
        const auto j = s.cover(b.left, b.right);
        if (!j) continue;
        Window w = s.window(*j);
        const double t = std::floor(b.left - w.left);  // unroll so that w contains b
        w.left += t;
        w.right += t;
        w.extension = Extension::periodic;
        const SmoothAlpha sj = alpha_smooth(mu, nu, w);
        const double theta = b.length() / w.length();
        const double nu_j_phi = sj.nu_phi / sj.nu_mass;
        const double k = std::pow((2.0 / theta) * (sj.nu_phi / sb.nu_phi) * (2.0 / nu_j_phi), 2);
        const double a = alpha(mu, nu, w);
        d.cover.push_back(*j);
        d.alpha_sq.push_back(a * a);
        d.constant.push_back(k);
        d.bound.push_back(k * a * a);
        d.rhs = std::max(d.rhs, k * a * a);
        if (d.alpha_s_sq > k * a * a + 1e-9) d.holds = false;
    }
    if (d.cover.empty()) throw PreconditionError("no system covers B(x, r)");
    d.slack = d.rhs - d.alpha_s_sq;
    return d;
}

}  // namespace sqfn
