#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>

#include "curvtomo/core/errors.hpp"
#include "curvtomo/core/vec.hpp"
#include "curvtomo/geometry/domain.hpp"
#include "curvtomo/geometry/energy_shell.hpp"
#include "curvtomo/geometry/trajectory.hpp"

namespace curvtomo {

/// Forward exit of the trajectory through (x, p(x) u(beta')) together with
/// the boundary Jacobian J^b relating ds dxi at the exit to dx dtheta' at x.
struct ExitJacobian {
    PhaseState2 exit;
    double ell_plus = 0.0;
    /// |det d(t, beta, s) / d(x1, x2, beta')| with t the boundary arc length,
    /// beta the direction angle at the exit and s = -ell_+.
    double det = 0.0;
    double jb = 0.0;
    /// Optional line integral of a phase-space function from x to the exit
    /// (trapezoid over the uniform steps).
    double path_integral = 0.0;
};

using PathIntegrand = std::function<double(const Vec2&, const Vec2&)>;

namespace detail {
struct TangentState {
    PhaseState2 base;
    std::array<Vec2, 3> dx;
    std::array<Vec2, 3> dth;
};

/// Derivative of the coupled system (flow plus linearized flow). The
/// x-derivative of the acceleration is a centred difference; the
/// theta-derivative is Y(x) exactly.
inline TangentState tangent_rhs(const TangentState& s, const ForceField2& f, double eps) {
    TangentState d;
    d.base = {s.base.theta, f.acceleration(s.base.x, s.base.theta)};
    const Mat2 y = f.magnetic(s.base.x);
    Mat2 ax;
    for (std::size_t j = 0; j < 2; ++j) {
        Vec2 e{};
        e[j] = eps;
        const Vec2 col = (f.acceleration(s.base.x + e, s.base.theta) - f.acceleration(s.base.x - e, s.base.theta)) /
                         (2.0 * eps);
        ax[0][j] = col[0];
        ax[1][j] = col[1];
    }
    for (std::size_t k = 0; k < 3; ++k) {
        d.dx[k] = s.dth[k];
        d.dth[k] = ax * s.dx[k] + y * s.dth[k];
    }
    return d;
}

inline TangentState axpy(const TangentState& s, double h, const TangentState& d) {
    TangentState r;
    r.base = {s.base.x + h * d.base.x, s.base.theta + h * d.base.theta};
    for (std::size_t k = 0; k < 3; ++k) {
        r.dx[k] = s.dx[k] + h * d.dx[k];
        r.dth[k] = s.dth[k] + h * d.dth[k];
    }
    return r;
}

inline TangentState tangent_rk4(const TangentState& s, double h, const ForceField2& f, double eps) {
    const auto k1 = tangent_rhs(s, f, eps);
    const auto k2 = tangent_rhs(axpy(s, 0.5 * h, k1), f, eps);
    const auto k3 = tangent_rhs(axpy(s, 0.5 * h, k2), f, eps);
    const auto k4 = tangent_rhs(axpy(s, h, k3), f, eps);
    TangentState r = axpy(s, h / 6.0, k1);
    r = axpy(r, h / 3.0, k2);
    r = axpy(r, h / 3.0, k3);
    return axpy(r, h / 6.0, k4);
}

inline double det3(const std::array<std::array<double, 3>, 3>& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

inline double finish_jb(ExitJacobian& out, const Domain2& domain, const EnergyShell2& shell, const Vec2& x) {
    const Vec2 n = domain.outward_normal(out.exit.x);
    out.jb = std::abs(dot(n, out.exit.theta)) * shell.speed(out.exit.x) * out.det / shell.speed(x);
    return out.jb;
}
}  // namespace detail

/// J^b from the variational equations integrated alongside the trajectory.
/// The exit time is found by a first pass; the second pass takes
/// ceil(ell_+ / h) uniform steps to it and corrects the tangents for the
/// variation of the exit time.
inline ExitJacobian boundary_jacobian_variational(const Vec2& x, double beta, const Domain2& domain,
                                                  const EnergyShell2& shell, const IntegratorOptions& opts = {},
                                                  const PathIntegrand& integrand = {}, double fd_eps = 1e-6) {
    const ResolvedStep rs = resolve_options(opts, domain, shell);
    const ForceField2& f = shell.force();
    const double p = shell.speed(x);
    const Vec2 u = unit_vector(beta);
    const PhaseState2 st{x, p * u};
    const auto first = integrate_to_exit(st, 1.0, domain, f, rs, [](double, const PhaseState2&) {});
    if (first.trapped) throw TrappedError(0, "boundary_jacobian: trapped trajectory");
    ExitJacobian out;
    out.ell_plus = first.s;
    const double eps = fd_eps * std::max(1.0, norm(x));

    detail::TangentState ts;
    ts.base = st;
    const Vec2 gphi = f.potential_gradient(x);
    for (std::size_t i = 0; i < 2; ++i) {
        ts.dx[i] = Vec2{};
        ts.dx[i][i] = 1.0;
        ts.dth[i] = (-gphi[i] / p) * u;
    }
    ts.dx[2] = Vec2{};
    ts.dth[2] = p * perp(u);

    const std::size_t n = first.s > 0.0 ? static_cast<std::size_t>(std::ceil(first.s / rs.h)) : 0;
    const double h = n ? first.s / static_cast<double>(n) : 0.0;
    double integral = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const detail::TangentState next = detail::tangent_rk4(ts, h, f, eps);
        if (integrand) integral += 0.5 * h * (integrand(ts.base.x, ts.base.theta) + integrand(next.base.x, next.base.theta));
        ts = next;
    }
    out.path_integral = integral;
    out.exit = ts.base;

    const Vec2 g = domain.level_gradient(ts.base.x);
    const double gt = dot(g, ts.base.theta);
    if (gt == 0.0) throw DomainError("boundary_jacobian: tangential exit");
    const Vec2 acc = f.acceleration(ts.base.x, ts.base.theta);
    const Vec2 tangent = perp(domain.outward_normal(ts.base.x));
    const double th2 = dot(ts.base.theta, ts.base.theta);
    std::array<std::array<double, 3>, 3> m{};
    for (std::size_t k = 0; k < 3; ++k) {
        const double dl = -dot(g, ts.dx[k]) / gt;
        const Vec2 dz = ts.dx[k] + dl * ts.base.theta;
        const Vec2 dth = ts.dth[k] + dl * acc;
        m[0][k] = dot(tangent, dz);
        m[1][k] = cross(ts.base.theta, dth) / th2;
        m[2][k] = -dl;
    }
    out.det = std::abs(detail::det3(m));
    detail::finish_jb(out, domain, shell, x);
    return out;
}

/// J^b by centred finite differences of the whole exit map with step fd_step.
inline ExitJacobian boundary_jacobian_fd(const Vec2& x, double beta, const Domain2& domain, const EnergyShell2& shell,
                                         const IntegratorOptions& opts = {}, double fd_step = 1e-5) {
    const ResolvedStep rs = resolve_options(opts, domain, shell);
    const ForceField2& f = shell.force();
    auto exit_of = [&](const Vec2& y, double b) {
        const auto r =
            integrate_to_exit(PhaseState2{y, shell.speed(y) * unit_vector(b)}, 1.0, domain, f, rs, [](double, const PhaseState2&) {});
        if (r.trapped) throw TrappedError(0, "boundary_jacobian_fd: trapped trajectory");
        return r;
    };
    const auto c = exit_of(x, beta);
    const double phi0 = domain.polar_angle(c.state.x);
    const double speed0 = domain.boundary_speed(phi0);
    auto unwrap = [](double a) { return std::remainder(a, kTwoPi); };
    std::array<std::array<double, 3>, 3> m{};
    for (std::size_t k = 0; k < 3; ++k) {
        Vec2 dx{};
        double db = 0.0;
        if (k < 2) dx[k] = fd_step; else db = fd_step;
        const auto a = exit_of(x + dx, beta + db);
        const auto b = exit_of(x - dx, beta - db);
        m[0][k] = speed0 * unwrap(domain.polar_angle(a.state.x) - domain.polar_angle(b.state.x)) / (2.0 * fd_step);
        m[1][k] = unwrap(angle_of(a.state.theta) - angle_of(b.state.theta)) / (2.0 * fd_step);
        m[2][k] = -(a.s - b.s) / (2.0 * fd_step);
    }
    ExitJacobian out;
    out.exit = c.state;
    out.ell_plus = c.s;
    out.det = std::abs(detail::det3(m));
    detail::finish_jb(out, domain, shell, x);
    return out;
}

}  // namespace curvtomo
