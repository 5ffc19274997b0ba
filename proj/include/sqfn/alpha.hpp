#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <unordered_map>

#include "sqfn/dyadic.hpp"
#include "sqfn/measure.hpp"

namespace sqfn {

// W1 distance between the normalized blow-ups on w; a side of zero mass is
// the zero measure.
double alpha(const Measure& mu, const Measure& nu, const Window& w);
double alpha(const Measure& mu, const Measure& nu, const DyadicInterval& i,
             const DyadicSystem& system = DyadicSystem::standard());

struct SmoothAlpha {
    double value = 0.0;
    double mu_phi = 0.0;
    double nu_phi = 0.0;
    double mu_mass = 0.0;
    double nu_mass = 0.0;
    // Exactly one of mu_phi, nu_phi vanishes.
    bool one_sided_null = false;
};
SmoothAlpha alpha_smooth(const Measure& mu, const Measure& nu, const Window& w);

struct SmoothBoundsReport {
    double alpha_s = 0.0;
    double alpha = 0.0;
    double absolute_bound = 2.0;
    double alpha_bound = 0.0;  // 2 alpha / nu_I(phi)
    double nu_i_phi = 0.0;
    double slack = 0.0;
    bool holds = false;
};
SmoothBoundsReport smooth_bounds_check(const Measure& mu, const Measure& nu, const Window& w);

struct StabilityReport {
    double alpha_s_inner = 0.0;
    double alpha_s_outer = 0.0;
    double nu_phi_inner = 0.0;
    double nu_phi_outer = 0.0;
    double bound = 0.0;          // (2/theta) (nu(phi_J)/nu(phi_I)) alpha_s(J)
    double smooth_ratio = 0.0;   // alpha_s(I) / alpha_s(J)
    double plain_ratio = 0.0;    // alpha(I) / alpha(J)
    double slack = 0.0;
    bool holds = false;
};
StabilityReport stability_check(const Measure& mu, const Measure& nu, const Window& inner,
                                const Window& outer, double theta);

struct DecayConstants {
    double epsilon = 0.0;
    double c = 0.0;
};
// Ramp bumps with Lipschitz constant 8/|I| give epsilon = 1/(16 D^3), C = 2 D^3.
DecayConstants epsilon_for_doubling(double d);

struct Ball {
    double center = 0.0;
    double radius = 0.0;
    Window window() const { return Window{center - radius, center + radius, Extension::zero}; }
    bool contains(const Ball& b) const;
};

struct BallParams {
    // Radii for a level-k interval lie in [1.1 2^(-k-1+s), 0.9 2^(-k+s)];
    // nesting of parent and child balls needs 2^s >= 10.
    int scale_offset = 4;
    int samples = 8;
};

struct BallChoice {
    Ball ball;
    double alpha_s = 0.0;
    double sampled_min = 0.0;
    int candidates = 0;
};
BallChoice select_ball(const Measure& mu, const Measure& nu, const DyadicInterval& i,
                       const BallParams& params = {});
// Radius band for a level-k interval.
std::pair<double, double> ball_band(int level, int scale_offset);

// Memo of alpha, smooth alpha and ball choices for one (mu, nu, system).
// The measures must outlive the table. Safe for concurrent use; concurrent
// misses may compute the same value twice, the first insert wins.
class AlphaTable {
public:
    AlphaTable(const Measure& mu, const Measure& nu, DyadicSystem system = DyadicSystem::standard(),
               BallParams ball_params = {});
    // The table keeps pointers; temporaries would dangle.
    AlphaTable(Measure&&, const Measure&, DyadicSystem = DyadicSystem::standard(), BallParams = {}) = delete;
    AlphaTable(const Measure&, Measure&&, DyadicSystem = DyadicSystem::standard(), BallParams = {}) = delete;

    double alpha(const DyadicInterval& i);
    SmoothAlpha smooth(const DyadicInterval& i);
    BallChoice ball(const DyadicInterval& i);
    double delta(const DyadicInterval& i) const;

    const Measure& mu() const { return *mu_; }
    const Measure& nu() const { return *nu_; }
    const DyadicSystem& system() const { return system_; }
    std::size_t size() const;

private:
    const Measure* mu_;
    const Measure* nu_;
    DyadicSystem system_;
    BallParams ball_params_;
    mutable std::mutex mutex_;
    std::unordered_map<std::uint64_t, double> alpha_;
    std::unordered_map<std::uint64_t, SmoothAlpha> smooth_;
    std::unordered_map<std::uint64_t, BallChoice> ball_;
};

}  // namespace sqfn
