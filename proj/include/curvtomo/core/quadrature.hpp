#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "curvtomo/core/errors.hpp"
#include "curvtomo/core/vec.hpp"

namespace curvtomo {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre rule with n nodes on [a, b].
inline QuadratureRule gauss_legendre(std::size_t n, double a, double b) {
    if (n == 0) throw ArgumentError("gauss_legendre: n must be positive");
    QuadratureRule q;
    q.nodes.resize(n);
    q.weights.resize(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(kPi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (std::size_t k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / static_cast<double>(k);
            }
            dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        q.nodes[i] = mid - half * z;
        q.nodes[n - 1 - i] = mid + half * z;
        q.weights[i] = q.weights[n - 1 - i] = half * w;
    }
    return q;
}

/// Composite midpoint rule with n cells on [a, b].
inline QuadratureRule midpoint_rule(std::size_t n, double a, double b) {
    if (n == 0) throw ArgumentError("midpoint_rule: n must be positive");
    QuadratureRule q;
    const double h = (b - a) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        q.nodes.push_back(a + (static_cast<double>(i) + 0.5) * h);
        q.weights.push_back(h);
    }
    return q;
}

/// Composite trapezoid rule with n >= 2 nodes (endpoints included).
inline QuadratureRule trapezoid_rule(std::size_t n, double a, double b) {
    if (n < 2) throw ArgumentError("trapezoid_rule: need at least two nodes");
    QuadratureRule q;
    const double h = (b - a) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        q.nodes.push_back(a + static_cast<double>(i) * h);
        q.weights.push_back((i == 0 || i + 1 == n) ? 0.5 * h : h);
    }
    return q;
}

/// Composite Simpson weights for n (even) equal intervals of width h.
inline std::vector<double> simpson_weights(std::size_t intervals, double h) {
    if (intervals == 0 || intervals % 2 != 0) throw ArgumentError("simpson_weights: interval count must be even");
    std::vector<double> w(intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i) {
        const double c = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        w[i] = c * h / 3.0;
    }
    return w;
}

/// Composite trapezoid weights for n equal intervals of width h.
inline std::vector<double> trapezoid_weights(std::size_t intervals, double h) {
    if (intervals == 0) throw ArgumentError("trapezoid_weights: need at least one interval");
    std::vector<double> w(intervals + 1, h);
    w.front() = w.back() = 0.5 * h;
    return w;
}

}  // namespace curvtomo
