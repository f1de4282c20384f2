#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "curvtomo/core/errors.hpp"
#include "curvtomo/core/vec.hpp"
#include "curvtomo/geometry/energy_shell.hpp"

namespace curvtomo {

/// Point (x, theta) of phase space.
template <std::size_t Dim>
struct PhaseState {
    Vec<Dim> x{};
    Vec<Dim> theta{};
};

using PhaseState2 = PhaseState<2>;

inline constexpr double kShellTolerance = 1e-8;
inline constexpr double kShellRenormalizeLimit = 1e-6;

/// Validates |theta| = p(x). Relative mismatch up to 1e-8 is accepted as is,
/// up to 1e-6 theta is rescaled onto the shell, anything larger is rejected.
template <std::size_t Dim>
PhaseState<Dim> on_shell(const Vec<Dim>& x, const Vec<Dim>& theta, const EnergyShell<Dim>& shell) {
    const double p = shell.speed(x);
    const double t = norm(theta);
    const double rel = std::abs(t - p) / p;
    if (rel <= kShellTolerance) return {x, theta};
    if (rel <= kShellRenormalizeLimit && t > 0.0) return {x, (p / t) * theta};
    throw DomainError("phase state off the energy shell: |theta| = " + std::to_string(t) +
                      ", p(x) = " + std::to_string(p));
}

/// Shell state at x moving in the unit direction v.
inline PhaseState2 shell_state(const Vec2& x, double direction_angle, const EnergyShell2& shell) {
    return {x, shell.speed(x) * unit_vector(direction_angle)};
}

}  // namespace curvtomo
