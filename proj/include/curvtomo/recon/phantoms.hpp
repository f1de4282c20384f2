#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "curvtomo/core/errors.hpp"
#include "curvtomo/core/grid.hpp"
#include "curvtomo/transport/phase_grid.hpp"

namespace curvtomo {

struct PhantomParams {
    Vec2 center{{0.15, -0.1}};
    double width = 0.25;
    /// Grid indices for one-hot.
    std::size_t i = 0, j = 0;
};

inline SourceImage gaussian_bump_phantom(const SpatialGrid& g, const Domain2& support, const Vec2& c = Vec2{{0.15, -0.1}},
                                         double width = 0.25) {
    return SourceImage::from_function(g, support, [&](const Vec2& x) {
        const Vec2 d = x - c;
        return std::exp(-dot(d, d) / (2.0 * width * width));
    });
}

inline SourceImage two_discs_phantom(const SpatialGrid& g, const Domain2& support) {
    const Vec2 c = support.center();
    const double r = support.radius();
    const Vec2 a = c + Vec2{{-0.4 * r, 0.15 * r}}, b = c + Vec2{{0.4 * r, -0.25 * r}};
    return SourceImage::from_function(g, support, [&](const Vec2& x) {
        double v = 0.0;
        if (norm(x - a) < 0.27 * r) v += 1.0;
        if (norm(x - b) < 0.2 * r) v += 0.5;
        return v;
    });
}

inline SourceImage smooth_ring_phantom(const SpatialGrid& g, const Domain2& support) {
    const Vec2 c = support.center();
    const double r = support.radius();
    return SourceImage::from_function(g, support, [&](const Vec2& x) {
        const double d = (norm(x - c) - 0.5 * r) / (0.1 * r);
        return std::exp(-0.5 * d * d);
    });
}

inline SourceImage one_hot_phantom(const SpatialGrid& g, const Domain2& support, std::size_t i, std::size_t j) {
    if (i >= g.nx() || j >= g.ny()) throw ArgumentError("one-hot phantom: index outside the grid");
    SourceImage s(g, support);
    s.values()[g.index(i, j)] = 1.0;
    s.apply_support();
    return s;
}

/// Names: gaussian-bump, two-discs, smooth-ring, one-hot.
inline SourceImage make_phantom(const std::string& name, const SpatialGrid& g, const Domain2& support,
                                const PhantomParams& p = {}) {
    if (name == "gaussian-bump") return gaussian_bump_phantom(g, support, p.center, p.width);
    if (name == "two-discs") return two_discs_phantom(g, support);
    if (name == "smooth-ring") return smooth_ring_phantom(g, support);
    if (name == "one-hot") return one_hot_phantom(g, support, p.i, p.j);
    throw ArgumentError("unknown phantom '" + name + "' (expected gaussian-bump, two-discs, smooth-ring or one-hot)");
}

/// Random trigonometric polynomial of degree <= max_frequency (in units of
/// pi / radius) times the smooth window (1 - |x - c|^2 / R^2)^2 on the
/// support disc.
inline SourceImage band_limited_phantom(const SpatialGrid& g, const Domain2& support, std::mt19937_64& rng,
                                        int max_frequency = 3) {
    std::normal_distribution<double> n;
    std::uniform_real_distribution<double> ph(0.0, kTwoPi);
    struct Mode {
        double kx, ky, a, phase;
    };
    std::vector<Mode> modes;
    const double R = support.radius();
    for (int kx = 0; kx <= max_frequency; ++kx)
        for (int ky = -max_frequency; ky <= max_frequency; ++ky) {
            if (kx * kx + ky * ky > max_frequency * max_frequency) continue;
            modes.push_back({kPi * kx / R, kPi * ky / R, n(rng), ph(rng)});
        }
    const Vec2 c = support.center();
    return SourceImage::from_function(g, support, [&](const Vec2& x) {
        const Vec2 d = x - c;
        const double w = 1.0 - dot(d, d) / (R * R);
        if (w <= 0.0) return 0.0;
        double v = 0.0;
        for (const auto& m : modes) v += m.a * std::cos(m.kx * d[0] + m.ky * d[1] + m.phase);
        return w * w * v;
    });
}

}  // namespace curvtomo
