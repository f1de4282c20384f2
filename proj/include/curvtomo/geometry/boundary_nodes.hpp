#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "curvtomo/core/errors.hpp"
#include "curvtomo/core/quadrature.hpp"
#include "curvtomo/core/vec.hpp"
#include "curvtomo/geometry/domain.hpp"
#include "curvtomo/geometry/energy_shell.hpp"

namespace curvtomo {

inline constexpr double kTangentTolerance = 1e-8;

enum class AngularRule { midpoint, trapezoid, gauss };
enum class BoundarySide { outgoing, incoming };

/// Quadrature node of the boundary measure |n . theta| dmu dtheta.
struct BoundaryNode {
    std::size_t position_index;
    std::size_t direction_index;
    double polar_angle;
    double arc_length;
    /// Angle of theta relative to the outward normal (outgoing side) or the
    /// inward normal (incoming side), in [-pi/2, pi/2].
    double relative_angle;
    Vec2 x;
    Vec2 theta;
    Vec2 normal;
    double weight;

    double direction_angle() const { return wrap_angle(angle_of(theta)); }
};

struct BoundaryNodeOptions {
    AngularRule angular_rule = AngularRule::midpoint;
    BoundarySide side = BoundarySide::outgoing;
};

/// Tensor nodes: n_bdry boundary positions at uniform polar angle (uniform
/// arc length on a disc) with periodic trapezoid weights |dz/dphi| dphi, and
/// n_angle relative directions on the half circle. The weight is
/// |n . theta| * arc weight * p(x) * angular weight; nodes with
/// |n . theta| < 1e-8 get weight zero.
inline std::vector<BoundaryNode> boundary_measure_nodes(const Domain2& domain, const EnergyShell2& shell,
                                                        std::size_t n_bdry, std::size_t n_angle,
                                                        const BoundaryNodeOptions& opts = {}) {
    if (n_bdry < 2 || n_angle < 2) throw ArgumentError("boundary_measure_nodes: need at least two nodes per axis");
    QuadratureRule ang;
    switch (opts.angular_rule) {
        case AngularRule::midpoint: ang = midpoint_rule(n_angle, -0.5 * kPi, 0.5 * kPi); break;
        case AngularRule::trapezoid: ang = trapezoid_rule(n_angle, -0.5 * kPi, 0.5 * kPi); break;
        case AngularRule::gauss: ang = gauss_legendre(n_angle, -0.5 * kPi, 0.5 * kPi); break;
    }
    const double dphi = kTwoPi / static_cast<double>(n_bdry);
    const double sign = opts.side == BoundarySide::outgoing ? 1.0 : -1.0;
    std::vector<BoundaryNode> nodes;
    nodes.reserve(n_bdry * n_angle);
    for (std::size_t i = 0; i < n_bdry; ++i) {
        const double phi = dphi * static_cast<double>(i);
        const Vec2 z = domain.boundary_point(phi);
        const Vec2 n = domain.outward_normal(z);
        const double arc_w = domain.boundary_speed(phi) * dphi;
        const double arc = domain.arc_length_at(phi);
        const double p = shell.speed(z);
        for (std::size_t j = 0; j < n_angle; ++j) {
            const double a = ang.nodes[j];
            const Vec2 dir = std::cos(a) * (sign * n) + std::sin(a) * perp(n);
            const Vec2 theta = p * dir;
            const double ndot = std::abs(dot(n, theta));
            const double w = ndot < kTangentTolerance ? 0.0 : ndot * arc_w * p * ang.weights[j];
            nodes.push_back({i, j, phi, arc, a, z, theta, n, w});
        }
    }
    return nodes;
}

/// Closed-form total measure of the outgoing boundary when p is constant:
/// perimeter * 2 p^2.
inline double boundary_measure_total_constant_speed(double perimeter, double p) { return perimeter * 2.0 * p * p; }

}  // namespace curvtomo
