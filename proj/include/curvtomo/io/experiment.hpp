#pragma once

#include <cmath>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "curvtomo/core/errors.hpp"
#include "curvtomo/geometry/bicubic_field.hpp"
#include "curvtomo/io/config.hpp"
#include "curvtomo/io/formats.hpp"
#include "curvtomo/recon/model.hpp"
#include "curvtomo/recon/phantoms.hpp"
#include "curvtomo/transport/measure.hpp"

namespace curvtomo {

inline Domain2 disc_from(const DiscSpec& d) {
    return Domain2::ball(Vec2{{d.center_x, d.center_y}}, d.radius);
}

inline ForceField2 force_from(const ExperimentConfig& c, const std::filesystem::path& base = ".") {
    const Vec2 fc{{c.force_center_x, c.force_center_y}};
    const std::string& k = c.force_kind;
    if (k == "zero") return ForceField2::zero();
    if (k == "magnetic") return ForceField2::constant_magnetic(c.force_b);
    if (k == "radial-magnetic") return ForceField2::radial_magnetic(c.force_b, c.force_width, fc);
    if (k == "gaussian-bump") return ForceField2::gaussian_bump(c.force_amplitude, c.force_width, fc);
    if (k == "harmonic") return ForceField2::harmonic(c.force_kappa, fc);
    if (k == "bump-magnetic")
        return ForceField2::gaussian_bump(c.force_amplitude, c.force_width, fc).plus(ForceField2::constant_magnetic(c.force_b));
    if (k == "grid") {
        if (c.force_potential_file.empty() && c.force_magnetic_file.empty())
            throw ArgumentError("force.kind=grid needs force.potential_file or force.magnetic_file");
        ForceField2 f = ForceField2::zero();
        if (!c.force_potential_file.empty())
            f = ForceField2::grid_potential(BicubicField(read_grid_image((base / c.force_potential_file).string())));
        if (!c.force_magnetic_file.empty())
            f = f.plus(ForceField2::grid_magnetic(BicubicField(read_grid_image((base / c.force_magnetic_file).string()))));
        return f;
    }
    throw ArgumentError("unknown force.kind '" + k +
                        "' (expected zero, magnetic, radial-magnetic, gaussian-bump, harmonic, bump-magnetic or grid)");
}

inline AttenuationField sigma_from(const ExperimentConfig& c, const std::filesystem::path& base = ".") {
    if (c.sigma_kind == "zero") return AttenuationField::zero();
    if (c.sigma_kind == "constant") {
        if (c.sigma_mu < 0.0) throw ArgumentError("sigma.mu must be non-negative");
        return AttenuationField::constant(c.sigma_mu);
    }
    if (c.sigma_kind == "grid") {
        if (c.sigma_file.empty()) throw ArgumentError("sigma.kind=grid needs sigma.file");
        return AttenuationField::from_image(read_grid_image((base / c.sigma_file).string()));
    }
    throw ArgumentError("unknown sigma.kind '" + c.sigma_kind + "' (expected zero, constant or grid)");
}

inline ScatteringKernel::Factor kappa_from(const KappaSpec& s) {
    return [s](const Vec2& x, const Vec2& th) {
        return (s.a0 + s.ax * x[0] + s.ay * x[1]) * (s.b0 + s.bx * th[0] + s.by * th[1]);
    };
}

/// lambda * kappa1 kappa2, or zero.
inline ScatteringKernel kernel_from(const ExperimentConfig& c) {
    if (c.scatter_kind == "zero") return ScatteringKernel::zero();
    if (c.scatter_kind == "separable")
        return ScatteringKernel::separable(kappa_from(c.kappa1), kappa_from(c.kappa2)).scaled(c.scatter_lambda);
    throw ArgumentError("unknown scatter.kind '" + c.scatter_kind + "' (expected zero or separable)");
}

inline AngularRule angular_rule_from(const std::string& s) {
    if (s == "midpoint") return AngularRule::midpoint;
    if (s == "trapezoid") return AngularRule::trapezoid;
    if (s == "gauss") return AngularRule::gauss;
    throw ArgumentError("unknown boundary.rule '" + s + "' (expected midpoint, trapezoid or gauss)");
}

/// Checks the config without building operators: discrete sizes, kinds,
/// nesting of the two discs and the energy level. Throws ArgumentError or
/// DomainError naming the offending key.
inline Geometry validate_config(const ExperimentConfig& c, const std::filesystem::path& base = ".") {
    if (!(c.domain.radius > 0.0) || !(c.outer.radius > 0.0)) throw ArgumentError("domain.radius and outer.radius must be positive");
    const double off = std::hypot(c.domain.center_x - c.outer.center_x, c.domain.center_y - c.outer.center_y);
    if (!(off + c.domain.radius < c.outer.radius))
        throw DomainError("config: the domain disc is not strictly inside the outer disc");
    if (c.grid_nx < 2 || c.grid_ny < 2) throw ArgumentError("grid.nx and grid.ny must be at least 2");
    if (c.grid_ntheta < 4 || c.grid_ntheta % 2 != 0) throw ArgumentError("grid.ntheta must be even and at least 4");
    if (c.boundary_positions < 2 || c.boundary_directions < 2)
        throw ArgumentError("boundary.positions and boundary.directions must be at least 2");
    if (c.integrator_step < 0.0) throw ArgumentError("integrator.step must be non-negative");
    if (c.recon_method != "cgne" && c.recon_method != "landweber")
        throw ArgumentError("unknown recon.method '" + c.recon_method + "' (expected cgne or landweber)");
    if (c.recon_epsilon < 0.0) throw ArgumentError("recon.epsilon must be non-negative");
    angular_rule_from(c.boundary_rule);
    kernel_from(c);
    sigma_from(c, base);
    const Domain2 d = disc_from(c.domain).with_enclosing(disc_from(c.outer));
    Geometry geo{d, EnergyShell2(c.tau, force_from(c, base), d.outermost()), {}};
    geo.integrator.step = c.integrator_step;
    return geo;
}

/// Operators for one configuration, built on first use. Not copyable: the
/// operators keep references to the geometry and to each other.
class Experiment {
  public:
    explicit Experiment(ExperimentConfig c, std::filesystem::path base = ".")
        : cfg_(std::move(c)), base_(std::move(base)), geo_(validate_config(cfg_, base_)), sigma_(sigma_from(cfg_, base_)),
          kernel_(kernel_from(cfg_)), grid_(bounding_grid(geo_.outer(), cfg_.grid_nx, cfg_.grid_ny)) {}

    static Experiment load(const std::string& path) {
        return Experiment(load_config(path), std::filesystem::path(path).parent_path());
    }

    Experiment(const Experiment&) = delete;
    Experiment& operator=(const Experiment&) = delete;
    Experiment(Experiment&&) = delete;

    const ExperimentConfig& config() const { return cfg_; }
    const Geometry& geometry() const { return geo_; }
    const AttenuationField& sigma() const { return sigma_; }
    const ScatteringKernel& kernel() const { return kernel_; }
    const SpatialGrid& grid() const { return grid_; }

    RayOperatorOptions ray_options() const {
        RayOperatorOptions o;
        o.n_positions = cfg_.boundary_positions;
        o.n_directions = cfg_.boundary_directions;
        o.angular_rule = angular_rule_from(cfg_.boundary_rule);
        return o;
    }

    TransportOptions transport_options() const {
        TransportOptions o;
        o.tol = cfg_.solver_tol;
        o.max_iter = cfg_.solver_max_iter;
        return o;
    }

    const RayOperator& ray() const {
        if (!ray_) ray_ = std::make_unique<RayOperator>(geo_, sigma_, grid_, ray_options());
        return *ray_;
    }
    const PhaseGrid& phase_grid() const {
        if (!pg_) pg_ = std::make_unique<PhaseGrid>(geo_, cfg_.grid_nx, cfg_.grid_ny, cfg_.grid_ntheta);
        return *pg_;
    }
    const TransportOperator& transport() const {
        if (!tr_) tr_ = std::make_unique<TransportOperator>(geo_, phase_grid(), sigma_, kernel_);
        return *tr_;
    }
    const MeasurementOperator& measurement() const {
        if (!meas_) meas_ = std::make_unique<MeasurementOperator>(transport(), ray());
        return *meas_;
    }

    /// Ray-only when there is no scattering, otherwise the full model.
    InverseProblemSetup setup() const {
        if (kernel_.is_zero()) return InverseProblemSetup::ray_only(ray(), cfg_.recon_epsilon);
        return InverseProblemSetup::with_transport(measurement(), transport_options(), cfg_.recon_epsilon);
    }

    PhantomParams phantom_params() const {
        PhantomParams p;
        p.center = Vec2{{cfg_.phantom_center_x, cfg_.phantom_center_y}};
        p.width = cfg_.phantom_width;
        p.i = cfg_.phantom_i;
        p.j = cfg_.phantom_j;
        return p;
    }
    SourceImage phantom(const std::string& name) const { return make_phantom(name, grid_, geo_.domain, phantom_params()); }

  private:
    ExperimentConfig cfg_;
    std::filesystem::path base_;
    Geometry geo_;
    AttenuationField sigma_;
    ScatteringKernel kernel_;
    SpatialGrid grid_;
    mutable std::unique_ptr<RayOperator> ray_;
    mutable std::unique_ptr<PhaseGrid> pg_;
    mutable std::unique_ptr<TransportOperator> tr_;
    mutable std::unique_ptr<MeasurementOperator> meas_;
};

}  // namespace curvtomo
