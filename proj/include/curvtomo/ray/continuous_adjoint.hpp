#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "curvtomo/core/errors.hpp"
#include "curvtomo/core/grid.hpp"
#include "curvtomo/core/parallel.hpp"
#include "curvtomo/geometry/flow_jacobian.hpp"
#include "curvtomo/ray/sinogram.hpp"
#include "curvtomo/transport/fields.hpp"
#include "curvtomo/transport/phase_grid.hpp"

namespace curvtomo {

enum class JacobianMethod { variational, finite_difference };

struct ContinuousAdjointOptions {
    std::size_t n_angles = 64;
    JacobianMethod jacobian = JacobianMethod::variational;
    /// Integrator settings for the per-point traces (defaults to the geometry's).
    bool override_integrator = false;
    IntegratorOptions integrator{};
};

/// [I* g](x) = int over the velocity circle at x of W(x, theta') J^b(x, theta')
/// g#(x, theta') dtheta', evaluated at every grid node inside the outer
/// domain with a periodic trapezoid rule in the direction angle
/// (dtheta' = p(x) dbeta'). g# is the sinogram interpolated at the forward
/// exit of (x, theta'); W is the attenuation from x to that exit.
inline GridImage continuous_adjoint(const Geometry& geo, const AttenuationField& sigma, const BoundarySinogram& g,
                                    const SpatialGrid& grid, const ContinuousAdjointOptions& o = {}) {
    if (o.n_angles < 2) throw ArgumentError("continuous_adjoint: need at least two angles");
    const Domain2& dom = geo.outer();
    const IntegratorOptions io = o.override_integrator ? o.integrator : geo.integrator;
    const auto mask = inside_mask(grid, dom);
    GridImage out(grid);
    const double db = kTwoPi / static_cast<double>(o.n_angles);
    PathIntegrand sig;
    if (!sigma.is_zero()) sig = [&sigma](const Vec2& x, const Vec2& th) { return sigma(x, th); };
    parallel_for(grid.size(), [&](std::size_t k) {
        if (!mask[k]) return;
        const Vec2 x = grid.center(k);
        const double p = geo.shell.speed(x);
        double acc = 0.0;
        for (std::size_t b = 0; b < o.n_angles; ++b) {
            const double beta = db * static_cast<double>(b);
            ExitJacobian j;
            double w = 1.0;
            if (o.jacobian == JacobianMethod::variational) {
                j = boundary_jacobian_variational(x, beta, dom, geo.shell, io, sig);
                w = std::exp(-j.path_integral);
            } else {
                j = boundary_jacobian_fd(x, beta, dom, geo.shell, io);
                if (sig) w = std::exp(-boundary_jacobian_variational(x, beta, dom, geo.shell, io, sig).path_integral);
            }
            const Vec2 n = dom.outward_normal(j.exit.x);
            const double alpha = std::atan2(dot(perp(n), j.exit.theta), dot(n, j.exit.theta));
            const double gs = g.interpolate(dom.polar_angle(j.exit.x), alpha);
            acc += w * j.jb * gs * p * db;
        }
        out.values[k] = acc;
    });
    return out;
}

}  // namespace curvtomo
