#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "curvtomo/core/errors.hpp"
#include "curvtomo/core/grid.hpp"
#include "curvtomo/core/vec.hpp"
#include "curvtomo/geometry/domain.hpp"
#include "curvtomo/geometry/energy_shell.hpp"
#include "curvtomo/geometry/trajectory.hpp"

namespace curvtomo {

/// Measurement geometry: the source domain (with its enclosing domain
/// attached when measurements are taken on a larger boundary), the energy
/// shell carrying the force field, and integrator settings.
struct Geometry {
    Domain2 domain;
    EnergyShell2 shell;
    IntegratorOptions integrator{};

    const Domain2& outer() const { return domain.outermost(); }
    const ForceField2& force() const { return shell.force(); }
};

/// Cell-centred grid over the bounding box of a disc-like domain.
inline SpatialGrid bounding_grid(const Domain2& d, std::size_t nx, std::size_t ny) {
    const Vec2 c = d.center();
    const double r = d.radius();
    return SpatialGrid(Box{c[0] - r, c[0] + r, c[1] - r, c[1] + r}, nx, ny);
}

/// 1 for grid nodes strictly inside the domain.
inline std::vector<std::uint8_t> inside_mask(const SpatialGrid& g, const Domain2& d) {
    std::vector<std::uint8_t> m(g.size(), 0);
    for (std::size_t k = 0; k < g.size(); ++k) m[k] = d.level(g.center(k)) < 0.0 ? 1 : 0;
    return m;
}

/// Spatial grid over the outer domain times n_theta equispaced unit
/// directions v_j = (cos 2 pi j / n, sin 2 pi j / n). The physical velocity at
/// node (x_i, j) is p(x_i) v_j. Phase index = spatial index * n_theta + j.
class PhaseGrid {
  public:
    PhaseGrid(const Geometry& geo, std::size_t nx, std::size_t ny, std::size_t n_theta)
        : grid_(bounding_grid(geo.outer(), nx, ny)), n_theta_(n_theta) {
        if (n_theta < 4 || n_theta % 2 != 0) throw ArgumentError("PhaseGrid: n_theta must be even and at least 4");
        mask_ = inside_mask(grid_, geo.outer());
        speed_.assign(grid_.size(), 0.0);
        for (std::size_t k = 0; k < grid_.size(); ++k) {
            if (!mask_[k]) continue;
            speed_[k] = geo.shell.speed(grid_.center(k));
            active_.push_back(k);
        }
    }

    const SpatialGrid& spatial() const { return grid_; }
    std::size_t n_theta() const { return n_theta_; }
    std::size_t size() const { return grid_.size() * n_theta_; }
    double dv() const { return kTwoPi / static_cast<double>(n_theta_); }
    double direction_angle(std::size_t j) const { return dv() * static_cast<double>(j); }
    Vec2 direction(std::size_t j) const { return unit_vector(direction_angle(j)); }

    bool inside(std::size_t spatial_index) const { return mask_[spatial_index] != 0; }
    const std::vector<std::uint8_t>& mask() const { return mask_; }
    /// Spatial indices inside the outer domain, ascending.
    const std::vector<std::size_t>& active() const { return active_; }
    double speed(std::size_t spatial_index) const { return speed_[spatial_index]; }

    std::size_t index(std::size_t spatial_index, std::size_t j) const { return spatial_index * n_theta_ + j; }
    Vec2 velocity(std::size_t spatial_index, std::size_t j) const { return speed_[spatial_index] * direction(j); }

    /// Quadrature weight of one phase node: cell area * p(x) * dv.
    double measure_weight(std::size_t spatial_index) const { return grid_.cell_area() * speed_[spatial_index] * dv(); }

    friend bool operator==(const PhaseGrid& a, const PhaseGrid& b) {
        return a.grid_ == b.grid_ && a.n_theta_ == b.n_theta_ && a.mask_ == b.mask_;
    }

  private:
    SpatialGrid grid_;
    std::size_t n_theta_;
    std::vector<std::uint8_t> mask_;
    std::vector<double> speed_;
    std::vector<std::size_t> active_;
};

/// u(x_i, p(x_i) v_j) on a PhaseGrid; zero at nodes outside the domain.
struct PhaseFunction {
    const PhaseGrid* grid = nullptr;
    std::vector<double> values;

    PhaseFunction() = default;
    explicit PhaseFunction(const PhaseGrid& g) : grid(&g), values(g.size(), 0.0) {}
    PhaseFunction(const PhaseGrid& g, std::vector<double> v) : grid(&g), values(std::move(v)) {
        if (values.size() != g.size()) throw ArgumentError("PhaseFunction: size does not match grid");
    }

    double& operator()(std::size_t i, std::size_t j) { return values[grid->index(i, j)]; }
    double operator()(std::size_t i, std::size_t j) const { return values[grid->index(i, j)]; }

    bool finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

/// Weighted L2 norm with weights cell area * p(x) * dv.
inline double phase_norm(const PhaseGrid& g, const std::vector<double>& u) {
    double s = 0.0;
    for (std::size_t i : g.active()) {
        const double w = g.measure_weight(i);
        for (std::size_t j = 0; j < g.n_theta(); ++j) {
            const double v = u[g.index(i, j)];
            s += w * v * v;
        }
    }
    return std::sqrt(s);
}

/// Source f(x) on a spatial grid, zero outside its support domain.
struct SourceImage {
    GridImage image;
    std::vector<std::uint8_t> support;

    SourceImage() = default;
    SourceImage(const SpatialGrid& g, const Domain2& support_domain) : image(g), support(inside_mask(g, support_domain)) {}
    SourceImage(GridImage img, const Domain2& support_domain)
        : image(std::move(img)), support(inside_mask(image.grid, support_domain)) {
        apply_support();
    }

    static SourceImage from_function(const SpatialGrid& g, const Domain2& support_domain,
                                     const std::function<double(const Vec2&)>& f) {
        SourceImage s(g, support_domain);
        for (std::size_t k = 0; k < g.size(); ++k)
            if (s.support[k]) s.image.values[k] = f(g.center(k));
        return s;
    }

    const SpatialGrid& grid() const { return image.grid; }
    std::vector<double>& values() { return image.values; }
    const std::vector<double>& values() const { return image.values; }

    void apply_support() {
        for (std::size_t k = 0; k < image.values.size(); ++k)
            if (!support[k]) image.values[k] = 0.0;
    }
};

/// Replicates a spatial function over all directions (the embedding of
/// velocity-independent sources into phase space).
inline PhaseFunction lift_to_phase(const PhaseGrid& g, const std::vector<double>& f) {
    if (f.size() != g.spatial().size()) throw ArgumentError("lift_to_phase: grid mismatch");
    PhaseFunction u(g);
    for (std::size_t i : g.active())
        for (std::size_t j = 0; j < g.n_theta(); ++j) u(i, j) = f[i];
    return u;
}

}  // namespace curvtomo
