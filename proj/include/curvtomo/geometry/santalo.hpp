#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "curvtomo/core/errors.hpp"
#include "curvtomo/core/parallel.hpp"
#include "curvtomo/core/quadrature.hpp"
#include "curvtomo/core/vec.hpp"
#include "curvtomo/geometry/boundary_nodes.hpp"
#include "curvtomo/geometry/domain.hpp"
#include "curvtomo/geometry/energy_shell.hpp"
#include "curvtomo/geometry/trajectory.hpp"

namespace curvtomo {

using PhaseIntegrand = std::function<double(const Vec2& x, const Vec2& theta)>;

struct SantaloOptions {
    std::size_t n_boundary = 200;
    std::size_t n_angle = 128;
    /// Uniform steps along each ray (even; composite Simpson).
    std::size_t n_ray = 256;
    /// Volume side: Gauss-Legendre in the scaled radius, periodic trapezoid in
    /// polar angle and in velocity angle. Zero picks n_ray / 4, n_boundary,
    /// n_angle.
    std::size_t lhs_radial = 0;
    std::size_t lhs_polar = 0;
    std::size_t lhs_velocity = 0;
    AngularRule angular_rule = AngularRule::midpoint;
    IntegratorOptions integrator{};
};

struct SantaloReport {
    double lhs = 0.0;
    double rhs = 0.0;
    /// |lhs - rhs| / |lhs|
    double rel_err = 0.0;
    /// |lhs - rhs| / (volume integral of |f|)
    double normalized_err = 0.0;
};

/// Volume side: integral over the domain of the integral of f over the
/// velocity circle of radius p(x) (dtheta = p dbeta).
inline std::vector<double> santalo_lhs(const std::vector<PhaseIntegrand>& fs, const Domain2& domain,
                                       const EnergyShell2& shell, const SantaloOptions& o, bool absolute = false) {
    const std::size_t nr = o.lhs_radial ? o.lhs_radial : std::max<std::size_t>(o.n_ray / 4, 8);
    const std::size_t nphi = o.lhs_polar ? o.lhs_polar : o.n_boundary;
    const std::size_t nv = o.lhs_velocity ? o.lhs_velocity : o.n_angle;
    const auto qr = gauss_legendre(nr, 0.0, 1.0);
    const double dphi = kTwoPi / static_cast<double>(nphi), dv = kTwoPi / static_cast<double>(nv);
    const std::size_t m = fs.size();
    std::vector<std::vector<double>> partial(nphi, std::vector<double>(m, 0.0));
    parallel_for(nphi, [&](std::size_t i) {
        const double phi = dphi * static_cast<double>(i);
        const double R = domain.boundary_radius(phi);
        const Vec2 u = unit_vector(phi);
        for (std::size_t a = 0; a < nr; ++a) {
            const double r = qr.nodes[a];
            const Vec2 x = domain.center() + (r * R) * u;
            const double p = shell.speed(x);
            const double wx = qr.weights[a] * R * R * r * dphi;
            for (std::size_t b = 0; b < nv; ++b) {
                const Vec2 th = p * unit_vector(dv * static_cast<double>(b));
                for (std::size_t k = 0; k < m; ++k) {
                    const double v = fs[k](x, th);
                    partial[i][k] += wx * p * dv * (absolute ? std::abs(v) : v);
                }
            }
        }
    });
    std::vector<double> out(m, 0.0);
    for (const auto& row : partial)
        for (std::size_t k = 0; k < m; ++k) out[k] += row[k];
    return out;
}

/// Boundary side: sum over outgoing boundary nodes of
/// (integral from ell_- to 0 of p(gamma) f(gamma, gamma') ds) / p(x) * weight.
/// Each ray is traced once to find ell_-, then resampled with n_ray uniform
/// RK4 steps and integrated by Simpson's rule.
inline std::vector<double> santalo_rhs(const std::vector<PhaseIntegrand>& fs, const Domain2& domain,
                                       const EnergyShell2& shell, const SantaloOptions& o) {
    if (o.n_ray == 0 || o.n_ray % 2 != 0) throw ArgumentError("santalo_check: n_ray must be even and positive");
    BoundaryNodeOptions bo;
    bo.angular_rule = o.angular_rule;
    const auto nodes = boundary_measure_nodes(domain, shell, o.n_boundary, o.n_angle, bo);
    IntegratorOptions io = o.integrator;
    io.keep_samples = false;
    const std::size_t m = fs.size();
    std::vector<std::vector<double>> contrib(nodes.size(), std::vector<double>(m, 0.0));
    parallel_for(nodes.size(), [&](std::size_t q) {
        const auto& nd = nodes[q];
        if (nd.weight == 0.0) return;
        const PhaseState2 st{nd.x, nd.theta};
        const auto tr = shoot_trajectory(st, Direction::backward, domain, shell, io);
        if (tr.status == TrajectoryStatus::trapped) throw TrappedError(q, "santalo_check: trapped boundary node");
        if (tr.ell_minus == 0.0) return;
        const auto pts = sample_uniform(st, tr.ell_minus, o.n_ray, shell.force());
        const auto w = simpson_weights(o.n_ray, std::abs(tr.ell_minus) / static_cast<double>(o.n_ray));
        const double scale = nd.weight / shell.speed(nd.x);
        for (std::size_t i = 0; i <= o.n_ray; ++i) {
            const double pw = w[i] * shell.speed(pts[i].x) * scale;
            for (std::size_t k = 0; k < m; ++k) contrib[q][k] += pw * fs[k](pts[i].x, pts[i].theta);
        }
    });
    std::vector<double> out(m, 0.0);
    for (const auto& row : contrib)
        for (std::size_t k = 0; k < m; ++k) out[k] += row[k];
    return out;
}

/// Both sides for several integrands sharing the same rays.
inline std::vector<SantaloReport> santalo_check_many(const std::vector<PhaseIntegrand>& fs, const Domain2& domain,
                                                     const EnergyShell2& shell, const SantaloOptions& o = {}) {
    const auto lhs = santalo_lhs(fs, domain, shell, o);
    const auto abs_lhs = santalo_lhs(fs, domain, shell, o, true);
    const auto rhs = santalo_rhs(fs, domain, shell, o);
    std::vector<SantaloReport> out(fs.size());
    for (std::size_t k = 0; k < fs.size(); ++k) {
        out[k].lhs = lhs[k];
        out[k].rhs = rhs[k];
        const double d = std::abs(lhs[k] - rhs[k]);
        out[k].rel_err = lhs[k] != 0.0 ? d / std::abs(lhs[k]) : (d == 0.0 ? 0.0 : INFINITY);
        out[k].normalized_err = abs_lhs[k] > 0.0 ? d / abs_lhs[k] : d;
    }
    return out;
}

inline SantaloReport santalo_check(const PhaseIntegrand& f, const Domain2& domain, const EnergyShell2& shell,
                                   const SantaloOptions& o = {}) {
    return santalo_check_many({f}, domain, shell, o).front();
}

}  // namespace curvtomo
