#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "curvtomo/core/errors.hpp"
#include "curvtomo/core/parallel.hpp"
#include "curvtomo/core/vec.hpp"
#include "curvtomo/geometry/domain.hpp"
#include "curvtomo/geometry/energy_shell.hpp"
#include "curvtomo/geometry/trajectory.hpp"

namespace curvtomo {

struct ConvexityViolation {
    std::size_t boundary_index;
    double polar_angle;
    /// +1 forward in time, -1 backward.
    int time_sign;
    /// +1 counter-clockwise tangent, -1 clockwise.
    int tangent_sign;
    double t;
    double level;
};

struct ConvexityReport {
    std::size_t samples_checked = 0;
    std::vector<ConvexityViolation> violations;
    bool passed() const { return violations.empty(); }
};

/// Starts tangentially at n_boundary boundary points (both tangent
/// orientations) and integrates short arcs of length 0.05 * diameter both
/// ways. Each arc is checked at n_tangent equally spaced times; a point with
/// level <= 0 (back in the closed domain) is a violation.
inline ConvexityReport check_strict_convexity(const Domain2& domain, const EnergyShell2& shell,
                                              std::size_t n_boundary, std::size_t n_tangent,
                                              const IntegratorOptions& opts = {}) {
    if (n_boundary < 1 || n_tangent < 1) throw ArgumentError("check_strict_convexity: counts must be positive");
    const ResolvedStep rs = resolve_options(opts, domain, shell);
    std::vector<std::vector<ConvexityViolation>> found(n_boundary);
    parallel_for(n_boundary, [&](std::size_t i) {
        const double phi = kTwoPi * static_cast<double>(i) / static_cast<double>(n_boundary);
        const Vec2 z = domain.boundary_point(phi);
        const Vec2 n = domain.outward_normal(z);
        const double p = shell.speed(z);
        const double delta = 0.05 * domain.diameter() / p;
        const std::size_t sub = static_cast<std::size_t>(std::ceil(delta / (rs.h * static_cast<double>(n_tangent))));
        for (int tangent : {1, -1}) {
            const PhaseState2 st{z, (p * tangent) * perp(n)};
            for (int time : {1, -1}) {
                const auto pts = sample_uniform(st, time * delta, n_tangent * sub, shell.force());
                for (std::size_t k = 1; k <= n_tangent; ++k) {
                    const double lv = domain.level(pts[k * sub].x);
                    if (!(lv > 0.0)) {
                        found[i].push_back({i, phi, time, tangent,
                                            time * delta * static_cast<double>(k) / static_cast<double>(n_tangent), lv});
                        break;
                    }
                }
            }
        }
    });
    ConvexityReport rep;
    rep.samples_checked = n_boundary * 4;
    for (auto& v : found) rep.violations.insert(rep.violations.end(), v.begin(), v.end());
    return rep;
}

struct TrappedSample {
    std::size_t index;
    Vec2 x;
    Vec2 theta;
};

struct NontrappingReport {
    std::size_t samples = 0;
    double max_forward = 0.0;
    double max_backward = 0.0;
    /// max over samples of |ell_+| + |ell_-|
    double max_travel = 0.0;
    std::vector<TrappedSample> trapped;
    bool passed() const { return trapped.empty(); }
};

/// Uniform random interior point and direction on the shell (rejection
/// sampling inside the bounding disc of radius domain.radius()).
template <class Rng>
PhaseState2 random_interior_state(const Domain2& domain, const EnergyShell2& shell, Rng& rng, double shrink = 1.0) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double r = domain.radius();
    while (true) {
        const Vec2 x = domain.center() + Vec2{{r * u(rng), r * u(rng)}};
        if (!(domain.level(x) < 0.0)) continue;
        if (shrink < 1.0 && !(domain.level(domain.center() + (1.0 / shrink) * (x - domain.center())) < 0.0)) continue;
        return shell_state(x, kPi * (u(rng) + 1.0), shell);
    }
}

/// Shoots n_samples seeded random interior states both ways with the given
/// travel-time budget.
inline NontrappingReport check_nontrapping(const Domain2& domain, const EnergyShell2& shell, std::size_t n_samples,
                                           double budget, std::uint64_t seed = 1, IntegratorOptions opts = {}) {
    if (!(budget > 0.0)) throw ArgumentError("check_nontrapping: budget must be positive");
    std::mt19937_64 rng(seed);
    std::vector<PhaseState2> starts;
    for (std::size_t i = 0; i < n_samples; ++i) starts.push_back(random_interior_state(domain, shell, rng));
    opts.budget = budget;
    opts.keep_samples = false;
    std::vector<Trajectory2> tr(n_samples);
    parallel_for(n_samples, [&](std::size_t i) { tr[i] = shoot_trajectory(starts[i], Direction::both, domain, shell, opts); });
    NontrappingReport rep;
    rep.samples = n_samples;
    for (std::size_t i = 0; i < n_samples; ++i) {
        if (tr[i].status == TrajectoryStatus::trapped) {
            rep.trapped.push_back({i, starts[i].x, starts[i].theta});
            continue;
        }
        rep.max_forward = std::max(rep.max_forward, tr[i].ell_plus);
        rep.max_backward = std::max(rep.max_backward, -tr[i].ell_minus);
        rep.max_travel = std::max(rep.max_travel, tr[i].ell_plus - tr[i].ell_minus);
    }
    return rep;
}

struct DriftReport {
    std::size_t trajectories = 0;
    double step = 0.0;
    double max_drift = 0.0;
    double max_drift_half_step = 0.0;
    /// max_drift / max_drift_half_step
    double ratio = 0.0;
};

/// Maximum relative energy drift over seeded random trajectories at step h
/// and h / 2.
inline DriftReport energy_drift_sweep(const Domain2& domain, const EnergyShell2& shell, std::size_t n, double h,
                                      std::uint64_t seed = 1) {
    std::mt19937_64 rng(seed);
    std::vector<PhaseState2> starts;
    for (std::size_t i = 0; i < n; ++i) starts.push_back(random_interior_state(domain, shell, rng));
    auto run = [&](double step) {
        std::vector<double> d(n);
        IntegratorOptions o;
        o.step = step;
        parallel_for(n, [&](std::size_t i) {
            const auto tr = shoot_trajectory(starts[i], Direction::both, domain, shell, o);
            if (tr.status == TrajectoryStatus::trapped) throw TrappedError(i, "energy_drift_sweep: trapped trajectory");
            d[i] = energy_drift(tr, shell);
        });
        return *std::max_element(d.begin(), d.end());
    };
    DriftReport r;
    r.trajectories = n;
    r.step = h;
    r.max_drift = run(h);
    r.max_drift_half_step = run(0.5 * h);
    r.ratio = r.max_drift_half_step > 0.0 ? r.max_drift / r.max_drift_half_step : INFINITY;
    return r;
}

}  // namespace curvtomo
