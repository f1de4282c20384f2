#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "curvtomo/core/errors.hpp"
#include "curvtomo/core/vec.hpp"
#include "curvtomo/geometry/domain.hpp"
#include "curvtomo/geometry/force_field.hpp"

namespace curvtomo {

/// Energy level tau of H = |theta|^2 / 2 + phi(x). The speed on the shell is
/// p(x) = sqrt(2 (tau - phi(x))). Construction samples phi over the closure of
/// the outermost domain and fails unless tau exceeds its maximum.
template <std::size_t Dim>
class EnergyShell {
  public:
    using Point = Vec<Dim>;

    EnergyShell(double tau, const ForceField<Dim>& force, const Domain<Dim>& domain, std::size_t samples_per_axis = 96)
        : tau_(tau), force_(force) {
        if (!std::isfinite(tau)) throw ArgumentError("EnergyShell: tau must be finite");
        const Domain<Dim>& outer = domain.outermost();
        const Point c = outer.center();
        const double r = outer.radius();
        double phi_max = -std::numeric_limits<double>::infinity();
        double phi_min = std::numeric_limits<double>::infinity();
        auto visit = [&](const Point& x) {
            if (outer.level(x) > 0.0) return;
            const double v = force.potential(x);
            phi_max = std::max(phi_max, v);
            phi_min = std::min(phi_min, v);
        };
        if constexpr (Dim == 2) {
            const std::size_t n = std::max<std::size_t>(samples_per_axis, 2);
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t i = 0; i < n; ++i)
                    visit(c + Point{{-r + 2.0 * r * static_cast<double>(i) / static_cast<double>(n - 1),
                                     -r + 2.0 * r * static_cast<double>(j) / static_cast<double>(n - 1)}});
            for (std::size_t k = 0; k < 4 * n; ++k) visit(outer.boundary_point(kTwoPi * static_cast<double>(k) / (4.0 * n)));
        } else {
            visit(c);
        }
        if (!(tau > phi_max))
            throw DomainError("EnergyShell: tau = " + std::to_string(tau) + " does not exceed max phi = " +
                              std::to_string(phi_max) + " on the closed domain");
        phi_max_ = phi_max;
        phi_min_ = phi_min;
    }

    double tau() const { return tau_; }
    const ForceField<Dim>& force() const { return force_; }

    /// p(x) = sqrt(2 (tau - phi(x))); DomainError where tau <= phi(x).
    double speed(const Point& x) const {
        const double d = tau_ - force_.potential(x);
        if (!(d > 0.0)) throw DomainError("EnergyShell: point outside the allowed region tau > phi");
        return std::sqrt(2.0 * d);
    }

    /// P(x) = p(x)^2.
    double speed_squared(const Point& x) const { return 2.0 * (tau_ - force_.potential(x)); }

    double energy(const Point& x, const Point& theta) const { return 0.5 * dot(theta, theta) + force_.potential(x); }

    /// Sampled speed extremes over the closed domain.
    double min_speed() const { return std::sqrt(2.0 * (tau_ - phi_max_)); }
    double max_speed() const { return std::sqrt(2.0 * (tau_ - phi_min_)); }

  private:
    double tau_;
    ForceField<Dim> force_;
    double phi_max_ = 0.0, phi_min_ = 0.0;
};

using EnergyShell2 = EnergyShell<2>;

}  // namespace curvtomo
