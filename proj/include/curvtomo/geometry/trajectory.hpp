#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <type_traits>
#include <vector>

#include "curvtomo/core/errors.hpp"
#include "curvtomo/core/vec.hpp"
#include "curvtomo/geometry/domain.hpp"
#include "curvtomo/geometry/energy_shell.hpp"
#include "curvtomo/geometry/force_field.hpp"
#include "curvtomo/geometry/phase_state.hpp"

namespace curvtomo {

template <std::size_t Dim>
struct PhaseDerivative {
    Vec<Dim> velocity;
    Vec<Dim> acceleration;
};

/// Right-hand side of Newton's equation: (theta, -grad phi + Y theta).
template <std::size_t Dim>
PhaseDerivative<Dim> rhs(const PhaseState<Dim>& s, const ForceField<Dim>& force) {
    return {s.theta, force.acceleration(s.x, s.theta)};
}

/// One classical RK4 step of signed size h.
template <std::size_t Dim>
PhaseState<Dim> rk4_step(const PhaseState<Dim>& s, double h, const ForceField<Dim>& force) {
    const auto k1 = rhs(s, force);
    const PhaseState<Dim> s2{s.x + (0.5 * h) * k1.velocity, s.theta + (0.5 * h) * k1.acceleration};
    const auto k2 = rhs(s2, force);
    const PhaseState<Dim> s3{s.x + (0.5 * h) * k2.velocity, s.theta + (0.5 * h) * k2.acceleration};
    const auto k3 = rhs(s3, force);
    const PhaseState<Dim> s4{s.x + h * k3.velocity, s.theta + h * k3.acceleration};
    const auto k4 = rhs(s4, force);
    const double w = h / 6.0;
    return {s.x + w * (k1.velocity + 2.0 * k2.velocity + 2.0 * k3.velocity + k4.velocity),
            s.theta + w * (k1.acceleration + 2.0 * k2.acceleration + 2.0 * k3.acceleration + k4.acceleration)};
}

struct IntegratorOptions {
    /// Step size; zero selects 1e-3 * diameter.
    double step = 0.0;
    /// Boundary localization tolerance relative to the diameter.
    double boundary_tolerance = 1e-10;
    /// Maximum |s|; zero selects 50 * diameter / min p.
    double budget = 0.0;
    /// Integrate in the enclosing domain instead of the domain itself.
    bool use_enclosing = false;
    /// Store every step (otherwise only the start and the exits).
    bool keep_samples = true;
};

enum class Direction { forward, backward, both };
enum class TrajectoryStatus { exited, trapped };

template <std::size_t Dim>
struct TrajectorySample {
    double s;
    Vec<Dim> x;
    Vec<Dim> theta;
    /// Low-order part of theta carried by the compensated update.
    Vec<Dim> theta_residual{};
};

template <std::size_t Dim>
struct Trajectory {
    /// Ordered by increasing s; contains s = 0.
    std::vector<TrajectorySample<Dim>> samples;
    double ell_minus = 0.0;
    double ell_plus = 0.0;
    PhaseState<Dim> exit_minus{};
    PhaseState<Dim> exit_plus{};
    TrajectoryStatus status = TrajectoryStatus::exited;
};

using Trajectory2 = Trajectory<2>;

/// Resolved integrator settings for one domain/shell pair.
struct ResolvedStep {
    double h;
    double eps_bdry;
    double budget;
};

template <std::size_t Dim>
ResolvedStep resolve_options(const IntegratorOptions& opts, const Domain<Dim>& domain, const EnergyShell<Dim>& shell) {
    if (opts.step < 0.0 || !std::isfinite(opts.step)) throw ArgumentError("integrator step must be positive");
    const double d = domain.diameter();
    ResolvedStep r;
    r.h = opts.step > 0.0 ? opts.step : 1e-3 * d;
    r.eps_bdry = opts.boundary_tolerance * d;
    r.budget = opts.budget > 0.0 ? opts.budget : 50.0 * d / shell.min_speed();
    return r;
}

template <std::size_t Dim>
struct ExitResult {
    double s = 0.0;
    PhaseState<Dim> state{};
    bool trapped = false;
};

namespace detail {
/// x + d with the rounding error of the sum kept in err (compensated update).
template <std::size_t Dim>
void compensated_add(Vec<Dim>& x, Vec<Dim>& err, const Vec<Dim>& d) {
    for (std::size_t i = 0; i < Dim; ++i) {
        const double y = d[i] + err[i];
        const double t = x[i] + y;
        const double bb = t - x[i];
        err[i] = (x[i] - (t - bb)) + (y - bb);
        x[i] = t;
    }
}

template <std::size_t Dim>
PhaseDerivative<Dim> rk4_increment(const PhaseState<Dim>& s, double h, const ForceField<Dim>& force) {
    const auto k1 = rhs(s, force);
    const PhaseState<Dim> s2{s.x + (0.5 * h) * k1.velocity, s.theta + (0.5 * h) * k1.acceleration};
    const auto k2 = rhs(s2, force);
    const PhaseState<Dim> s3{s.x + (0.5 * h) * k2.velocity, s.theta + (0.5 * h) * k2.acceleration};
    const auto k3 = rhs(s3, force);
    const PhaseState<Dim> s4{s.x + h * k3.velocity, s.theta + h * k3.acceleration};
    const auto k4 = rhs(s4, force);
    const double w = h / 6.0;
    return {w * (k1.velocity + 2.0 * k2.velocity + 2.0 * k3.velocity + k4.velocity),
            w * (k1.acceleration + 2.0 * k2.acceleration + 2.0 * k3.acceleration + k4.acceleration)};
}

template <class Visit, std::size_t Dim>
void call_visit(Visit& visit, double s, const PhaseState<Dim>& st, const Vec<Dim>& theta_residual) {
    if constexpr (std::is_invocable_v<Visit&, double, const PhaseState<Dim>&, const Vec<Dim>&>)
        visit(s, st, theta_residual);
    else
        visit(s, st);
}
}  // namespace detail

/// Integrates from start with steps of size sign * h until the level set
/// becomes nonnegative, then localizes the crossing inside the last step by
/// bisection on the substep length followed by one Newton correction.
/// The state update is compensated (rounding errors of the running sum are
/// carried forward). visit(s, state) or visit(s, state, theta_residual) is
/// called for the start, every interior step, and the exit.
/// A start on the boundary that moves outward exits at s = 0.
template <std::size_t Dim, class Visit>
ExitResult<Dim> integrate_to_exit(const PhaseState<Dim>& start, double sign, const Domain<Dim>& domain,
                                  const ForceField<Dim>& force, const ResolvedStep& rs, Visit&& visit,
                                  const Vec<Dim>& theta_residual = {}) {
    if (!(rs.h > 0.0)) throw ArgumentError("integrator step must be positive");
    ExitResult<Dim> out;
    Vec<Dim> ex{}, et = theta_residual;
    detail::call_visit(visit, 0.0, start, et);
    const double psi0 = domain.level(start.x);
    if (psi0 > rs.eps_bdry) throw DomainError("trajectory start lies outside the domain");
    if (psi0 >= -rs.eps_bdry && sign * dot(domain.level_gradient(start.x), start.theta) >= 0.0) {
        out.state = start;
        return out;
    }
    PhaseState<Dim> cur = start;
    double s = 0.0;
    const double h = sign * rs.h;
    std::size_t steps = 0;
    while (true) {
        const auto inc = detail::rk4_increment(cur, h, force);
        PhaseState<Dim> next = cur;
        Vec<Dim> nex = ex, net = et;
        detail::compensated_add(next.x, nex, inc.velocity);
        detail::compensated_add(next.theta, net, inc.acceleration);
        if (!std::isfinite(next.x[0]) || !std::isfinite(next.theta[0]))
            throw NumericalError("trajectory integration produced a non-finite state");
        if (domain.level(next.x) >= 0.0) {
            double lo = 0.0, hi = 1.0;
            while ((hi - lo) * rs.h > rs.eps_bdry) {
                const double mid = 0.5 * (lo + hi);
                (domain.level(rk4_step(cur, mid * h, force).x) < 0.0 ? lo : hi) = mid;
            }
            double t = 0.5 * (lo + hi);
            PhaseState<Dim> e = rk4_step(cur, t * h, force);
            const double slope = dot(domain.level_gradient(e.x), e.theta) * h;
            if (slope != 0.0) {
                const double tn = t - domain.level(e.x) / slope;
                const double slack = hi - lo;
                if (tn >= lo - slack && tn <= hi + slack) t = tn;
            }
            const auto part = detail::rk4_increment(cur, t * h, force);
            e = cur;
            detail::compensated_add(e.x, ex, part.velocity);
            detail::compensated_add(e.theta, et, part.acceleration);
            out.s = s + t * h;
            out.state = e;
            detail::call_visit(visit, out.s, e, et);
            return out;
        }
        ++steps;
        s = static_cast<double>(steps) * h;
        cur = next;
        ex = nex;
        et = net;
        if (std::abs(s) > rs.budget) {
            out.s = s;
            out.state = cur;
            out.trapped = true;
            return out;
        }
        detail::call_visit(visit, s, cur, et);
    }
}

/// Low-order correction r such that theta + r lies on the shell to extended
/// precision.
template <std::size_t Dim>
Vec<Dim> shell_residual(const PhaseState<Dim>& st, const EnergyShell<Dim>& shell) {
    const long double p2 =
        2.0L * (static_cast<long double>(shell.tau()) - static_cast<long double>(shell.force().potential(st.x)));
    long double t2 = 0.0L;
    for (std::size_t i = 0; i < Dim; ++i) t2 += static_cast<long double>(st.theta[i]) * st.theta[i];
    Vec<Dim> r{};
    if (!(t2 > 0.0L) || !(p2 > 0.0L)) return r;
    const long double scale = std::sqrt(p2 / t2);
    for (std::size_t i = 0; i < Dim; ++i)
        r[i] = static_cast<double>((scale - 1.0L) * static_cast<long double>(st.theta[i]));
    return r;
}

/// Integrates Newton's equation from start in the requested direction(s).
/// A trajectory that stays inside beyond the travel-time budget is returned
/// with status trapped.
template <std::size_t Dim>
Trajectory<Dim> shoot_trajectory(const PhaseState<Dim>& start, Direction dir, const Domain<Dim>& domain,
                                 const EnergyShell<Dim>& shell, const IntegratorOptions& opts = {}) {
    const Domain<Dim>& dom = opts.use_enclosing ? domain.outermost() : domain;
    const ResolvedStep rs = resolve_options(opts, dom, shell);
    const PhaseState<Dim> s0 = on_shell(start.x, start.theta, shell);
    const Vec<Dim> res0 = shell_residual(s0, shell);
    Trajectory<Dim> tr;
    std::vector<TrajectorySample<Dim>> back, fwd;
    auto recorder = [&](std::vector<TrajectorySample<Dim>>& v) {
        return [&v, &opts](double s, const PhaseState<Dim>& st, const Vec<Dim>& res) {
            if (opts.keep_samples || s == 0.0) v.push_back({s, st.x, st.theta, res});
        };
    };
    auto keep_exit = [&](std::vector<TrajectorySample<Dim>>& v, const ExitResult<Dim>& r) {
        if (!opts.keep_samples && r.s != 0.0) v.push_back({r.s, r.state.x, r.state.theta});
    };
    if (dir != Direction::forward) {
        const auto r = integrate_to_exit(s0, -1.0, dom, shell.force(), rs, recorder(back), res0);
        keep_exit(back, r);
        tr.ell_minus = r.s;
        tr.exit_minus = r.state;
        if (r.trapped) tr.status = TrajectoryStatus::trapped;
    }
    if (dir != Direction::backward) {
        const auto r = integrate_to_exit(s0, 1.0, dom, shell.force(), rs, recorder(fwd), res0);
        keep_exit(fwd, r);
        tr.ell_plus = r.s;
        tr.exit_plus = r.state;
        if (r.trapped) tr.status = TrajectoryStatus::trapped;
    }
    if (dir == Direction::forward) {
        tr.exit_minus = s0;
        tr.samples = std::move(fwd);
    } else {
        std::reverse(back.begin(), back.end());
        tr.samples = std::move(back);
        if (dir == Direction::backward) {
            tr.exit_plus = s0;
        } else {
            tr.samples.insert(tr.samples.end(), fwd.begin() + 1, fwd.end());
        }
    }
    return tr;
}

/// States at n + 1 equally spaced times from 0 to s_end (either sign), each
/// reached by exactly one RK4 step of size s_end / n from the previous one.
template <std::size_t Dim>
std::vector<PhaseState<Dim>> sample_uniform(const PhaseState<Dim>& start, double s_end, std::size_t n,
                                            const ForceField<Dim>& force) {
    if (n == 0) throw ArgumentError("sample_uniform: need at least one interval");
    std::vector<PhaseState<Dim>> out;
    out.reserve(n + 1);
    out.push_back(start);
    const double h = s_end / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(rk4_step(out.back(), h, force));
    return out;
}

/// max_s |H(x(s), theta(s)) - tau| / |tau| over the stored samples. The
/// kinetic term is evaluated in extended precision including the carried
/// low-order part of theta.
template <std::size_t Dim>
double energy_drift(const Trajectory<Dim>& tr, const EnergyShell<Dim>& shell) {
    long double d = 0.0L;
    for (const auto& smp : tr.samples) {
        long double kin = 0.0L;
        for (std::size_t i = 0; i < Dim; ++i) {
            const long double t = static_cast<long double>(smp.theta[i]) + smp.theta_residual[i];
            kin += t * t;
        }
        const long double h = 0.5L * kin + shell.force().potential(smp.x);
        d = std::max(d, std::abs(h - static_cast<long double>(shell.tau())));
    }
    return static_cast<double>(d / std::abs(static_cast<long double>(shell.tau())));
}

}  // namespace curvtomo
