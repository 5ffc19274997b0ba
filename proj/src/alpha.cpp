#include "sqfn/alpha.hpp"

#include <algorithm>
#include <cmath>

#include "sqfn/transport.hpp"

namespace sqfn {

double alpha(const Measure& mu, const Measure& nu, const Window& w) {
    const Measure a = mu.blowup(w).normalized();
    const Measure b = nu.blowup(w).normalized();
    return w1_supported(a, b).value;
}

double alpha(const Measure& mu, const Measure& nu, const DyadicInterval& i, const DyadicSystem& system) {
    return alpha(mu, nu, system.window(i));
}

SmoothAlpha alpha_smooth(const Measure& mu, const Measure& nu, const Window& w) {
    static const PiecewiseLinearFn phi = PiecewiseLinearFn::tent();
    SmoothAlpha s;
    const Measure a = mu.blowup(w);
    const Measure b = nu.blowup(w);
    s.mu_mass = a.total();
    s.nu_mass = b.total();
    s.mu_phi = a.integrate(phi);
    s.nu_phi = b.integrate(phi);
    const Measure an = s.mu_phi > 0.0 ? a.scaled(1.0 / s.mu_phi) : Measure();
    const Measure bn = s.nu_phi > 0.0 ? b.scaled(1.0 / s.nu_phi) : Measure();
    s.one_sided_null = (s.mu_phi > 0.0) != (s.nu_phi > 0.0);
    s.value = w1_supported(an, bn).value;
    return s;
}

SmoothBoundsReport smooth_bounds_check(const Measure& mu, const Measure& nu, const Window& w) {
    const SmoothAlpha s = alpha_smooth(mu, nu, w);
    if (!(s.nu_phi > 0.0)) throw PreconditionError("smooth_bounds_check needs nu(phi_I) > 0");
    SmoothBoundsReport r;
    r.alpha_s = s.value;
    r.alpha = alpha(mu, nu, w);
    r.nu_i_phi = s.nu_phi / s.nu_mass;
    r.alpha_bound = 2.0 * r.alpha / r.nu_i_phi;
    r.slack = std::min(r.absolute_bound, r.alpha_bound) - r.alpha_s;
    r.holds = r.slack >= -1e-9;
    return r;
}

StabilityReport stability_check(const Measure& mu, const Measure& nu, const Window& inner,
                                const Window& outer, double theta) {
    if (!(theta > 0.0)) throw ParameterError("theta must be positive");
    if (inner.left < outer.left - 1e-15 || inner.right > outer.right + 1e-15) {
        throw PreconditionError("stability_check needs I inside J");
    }
    if (inner.length() < theta * outer.length() * (1.0 - 1e-12)) {
        throw PreconditionError("stability_check needs |I| >= theta |J|");
    }
    const SmoothAlpha si = alpha_smooth(mu, nu, inner);
    const SmoothAlpha sj = alpha_smooth(mu, nu, outer);
    if (!(si.nu_phi > 0.0)) throw PreconditionError("stability_check needs nu(phi_I) > 0");
    StabilityReport r;
    r.alpha_s_inner = si.value;
    r.alpha_s_outer = sj.value;
    // nu(phi_I) and nu(phi_J) unnormalized: the blow-up integrals above.
    r.nu_phi_inner = si.nu_phi;
    r.nu_phi_outer = sj.nu_phi;
    r.bound = (2.0 / theta) * (sj.nu_phi / si.nu_phi) * sj.value;
    r.smooth_ratio = sj.value > 0.0 ? si.value / sj.value : (si.value > 0.0 ? INFINITY : 1.0);
    const double ai = alpha(mu, nu, inner);
    const double aj = alpha(mu, nu, outer);
    r.plain_ratio = aj > 0.0 ? ai / aj : (ai > 0.0 ? INFINITY : 1.0);
    r.slack = r.bound - r.alpha_s_inner;
    r.holds = r.slack >= -1e-9;
    return r;
}

DecayConstants epsilon_for_doubling(double d) {
    if (!(d >= 1.0)) throw ParameterError("doubling constant must be >= 1");
    constexpr double c_prime = 8.0;
    const double d3 = d * d * d;
    return {1.0 / (2.0 * c_prime * d3), 2.0 * d3};
}

bool Ball::contains(const Ball& b) const {
    return center - radius <= b.center - b.radius && b.center + b.radius <= center + radius;
}

std::pair<double, double> ball_band(int level, int scale_offset) {
    return {1.1 * std::ldexp(1.0, -level - 1 + scale_offset), 0.9 * std::ldexp(1.0, -level + scale_offset)};
}

BallChoice select_ball(const Measure& mu, const Measure& nu, const DyadicInterval& i, const BallParams& params) {
    if (params.samples < 1) throw ParameterError("select_ball needs samples >= 1");
    const double a = i.left();
    const double b = i.right();
    if (!(mu.mass(a, b, true) > 0.0)) throw SupportError("interval " + i.to_string() + " misses spt mu");
    std::vector<double> centers;
    for (const Atom& at : mu.atoms()) {
        if (at.position >= a && at.position <= b) centers.push_back(at.position);
    }
    const double h = (b - a) / params.samples;
    for (int s = 0; s < params.samples; ++s) {
        const double l = a + s * h;
        if (mu.mass(l, l + h, true) > 0.0) centers.push_back(l + 0.5 * h);
    }
    const auto [rlo, rhi] = ball_band(i.level, params.scale_offset);
    BallChoice best;
    bool first = true;
    for (double x : centers) {
        for (int s = 0; s < params.samples; ++s) {
            const double t = params.samples == 1 ? 0.5 : static_cast<double>(s) / (params.samples - 1);
            const double r = rlo * std::pow(rhi / rlo, t);
            const Ball ball{x, r};
            const double v = alpha_smooth(mu, nu, ball.window()).value;
            ++best.candidates;
            if (first || v < best.alpha_s) {
                best.ball = ball;
                best.alpha_s = v;
                first = false;
            }
        }
    }
    best.sampled_min = best.alpha_s;
    return best;
}

AlphaTable::AlphaTable(const Measure& mu, const Measure& nu, DyadicSystem system, BallParams ball_params)
    : mu_(&mu), nu_(&nu), system_(std::move(system)), ball_params_(ball_params) {}

double AlphaTable::alpha(const DyadicInterval& i) {
    const std::uint64_t k = i.key();
    {
        std::lock_guard lock(mutex_);
        if (auto it = alpha_.find(k); it != alpha_.end()) return it->second;
    }
    const double v = sqfn::alpha(*mu_, *nu_, i, system_);
    std::lock_guard lock(mutex_);
    return alpha_.emplace(k, v).first->second;
}

SmoothAlpha AlphaTable::smooth(const DyadicInterval& i) {
    const std::uint64_t k = i.key();
    {
        std::lock_guard lock(mutex_);
        if (auto it = smooth_.find(k); it != smooth_.end()) return it->second;
    }
    const SmoothAlpha v = alpha_smooth(*mu_, *nu_, system_.window(i));
    std::lock_guard lock(mutex_);
    return smooth_.emplace(k, v).first->second;
}

BallChoice AlphaTable::ball(const DyadicInterval& i) {
    const std::uint64_t k = i.key();
    {
        std::lock_guard lock(mutex_);
        if (auto it = ball_.find(k); it != ball_.end()) return it->second;
    }
    const BallChoice v = select_ball(*mu_, *nu_, i, ball_params_);
    std::lock_guard lock(mutex_);
    return ball_.emplace(k, v).first->second;
}

double AlphaTable::delta(const DyadicInterval& i) const { return sqfn::delta(*mu_, *nu_, i, system_); }

std::size_t AlphaTable::size() const {
    std::lock_guard lock(mutex_);
    return alpha_.size() + smooth_.size() + ball_.size();
}

}  // namespace sqfn
