#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "curvtomo/core/errors.hpp"
#include "curvtomo/core/quadrature.hpp"
#include "curvtomo/core/vec.hpp"

namespace curvtomo {

/// Open bounded domain described by a level-set function: negative inside,
/// positive outside. Level-set domains must be star-shaped about their
/// center; the boundary is parametrized by polar angle about that center.
///
/// A domain may carry an enclosing domain (the larger region used for
/// measurements); the closure of the inner domain must lie strictly inside it.
template <std::size_t Dim>
class Domain {
  public:
    using Point = Vec<Dim>;
    using LevelFn = std::function<double(const Point&)>;
    using GradFn = std::function<Point(const Point&)>;

    enum class Kind { ball, level_set };

    /// Ball |x - center| < radius. Its level set is (|x-c|^2 - R^2) / (2R),
    /// whose gradient is the unit normal on the boundary.
    static Domain ball(const Point& center, double radius) {
        if (!(radius > 0.0)) throw ArgumentError("Domain::ball: radius must be positive");
        Domain d;
        d.kind_ = Kind::ball;
        d.center_ = center;
        d.radius_ = radius;
        d.diameter_ = 2.0 * radius;
        d.level_ = [center, radius](const Point& x) {
            const Point r = x - center;
            return (dot(r, r) - radius * radius) / (2.0 * radius);
        };
        d.grad_ = [center, radius](const Point& x) { return (x - center) / radius; };
        return d;
    }

    /// General smooth domain. max_radius bounds |x - center| over the closure.
    static Domain level_set(LevelFn level, GradFn gradient, const Point& center, double max_radius) {
        if (!level || !gradient) throw ArgumentError("Domain::level_set: level set and gradient required");
        if (!(max_radius > 0.0)) throw ArgumentError("Domain::level_set: max_radius must be positive");
        Domain d;
        d.kind_ = Kind::level_set;
        d.center_ = center;
        d.radius_ = max_radius;
        d.level_ = std::move(level);
        d.grad_ = std::move(gradient);
        if (!(d.level_(center) < 0.0)) throw DomainError("Domain::level_set: center must be inside");
        if constexpr (Dim == 2) {
            double diam = 0.0;
            constexpr int n = 360;
            std::vector<Vec2> pts;
            for (int i = 0; i < n; ++i) pts.push_back(d.boundary_point(kTwoPi * i / n));
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) diam = std::max(diam, norm(pts[i] - pts[j]));
            d.diameter_ = diam;
        } else {
            d.diameter_ = 2.0 * max_radius;
        }
        return d;
    }

    Kind kind() const { return kind_; }
    const Point& center() const { return center_; }
    /// Ball radius, or the radius bound of a level-set domain.
    double radius() const { return radius_; }
    double diameter() const { return diameter_; }

    double level(const Point& x) const { return level_(x); }
    Point level_gradient(const Point& x) const { return grad_(x); }
    Point outward_normal(const Point& x) const {
        const Point g = grad_(x);
        const double n = norm(g);
        if (!(n > 0.0)) throw DomainError("Domain: vanishing level-set gradient");
        return g / n;
    }
    bool contains(const Point& x) const { return level_(x) < 0.0; }

    /// Attaches the enclosing domain. Throws when a sampled boundary point of
    /// this domain is not strictly inside it.
    Domain with_enclosing(const Domain& outer) const {
        if (outer.enclosing_) throw ArgumentError("Domain::with_enclosing: nested enclosing domains");
        Domain d = *this;
        if constexpr (Dim == 2) {
            for (int i = 0; i < 720; ++i) {
                const Vec2 z = boundary_point(kTwoPi * i / 720.0);
                if (!(outer.level(z) < 0.0))
                    throw DomainError("Domain::with_enclosing: closure is not strictly inside the enclosing domain");
            }
        } else {
            if (kind_ != Kind::ball || outer.kind_ != Kind::ball ||
                !(norm(center_ - outer.center_) + radius_ < outer.radius_))
                throw DomainError("Domain::with_enclosing: closure is not strictly inside the enclosing domain");
        }
        d.enclosing_ = std::make_shared<const Domain>(outer);
        return d;
    }
    const Domain* enclosing() const { return enclosing_.get(); }
    /// The enclosing domain if attached, otherwise this one.
    const Domain& outermost() const { return enclosing_ ? *enclosing_ : *this; }

    // --- 2D boundary parametrization by polar angle about the center ---

    double boundary_radius(double angle) const
        requires(Dim == 2)
    {
        if (kind_ == Kind::ball) return radius_;
        const Vec2 u = unit_vector(angle);
        double lo = 0.0, hi = radius_;
        if (!(level_(center_ + hi * u) > 0.0))
            throw DomainError("Domain: boundary not bracketed within max_radius");
        for (int it = 0; it < 200 && hi - lo > 1e-15 * radius_; ++it) {
            const double mid = 0.5 * (lo + hi);
            (level_(center_ + mid * u) < 0.0 ? lo : hi) = mid;
        }
        double r = 0.5 * (lo + hi);
        const double slope = dot(grad_(center_ + r * u), u);
        if (slope > 0.0) {
            const double polished = r - level_(center_ + r * u) / slope;
            if (polished >= lo && polished <= hi) r = polished;
        }
        return r;
    }

    Vec2 boundary_point(double angle) const
        requires(Dim == 2)
    {
        return center_ + boundary_radius(angle) * unit_vector(angle);
    }

    /// |dz/d angle| at the boundary point with the given polar angle.
    double boundary_speed(double angle) const
        requires(Dim == 2)
    {
        if (kind_ == Kind::ball) return radius_;
        const double r = boundary_radius(angle);
        const Vec2 u = unit_vector(angle);
        const Vec2 g = grad_(center_ + r * u);
        const double dpsi_dr = dot(g, u);
        if (!(std::abs(dpsi_dr) > 0.0)) throw DomainError("Domain: boundary is not star-shaped about the center");
        const double dr = -dot(g, r * perp(u)) / dpsi_dr;
        return std::sqrt(r * r + dr * dr);
    }

    /// Arc length from polar angle 0 to the given angle in [0, 2*pi).
    double arc_length_at(double angle) const
        requires(Dim == 2)
    {
        if (kind_ == Kind::ball) return radius_ * angle;
        if (angle <= 0.0) return 0.0;
        const auto q = gauss_legendre(64, 0.0, angle);
        double s = 0.0;
        for (std::size_t i = 0; i < q.nodes.size(); ++i) s += q.weights[i] * boundary_speed(q.nodes[i]);
        return s;
    }

    double perimeter() const
        requires(Dim == 2)
    {
        return arc_length_at(kTwoPi);
    }

    /// Polar angle of a point about the center, in [0, 2*pi).
    double polar_angle(const Vec2& x) const
        requires(Dim == 2)
    {
        return wrap_angle(angle_of(x - center_));
    }

    /// Samples the boundary and checks the level-set sign convention and
    /// |grad| > 0 on the zero set. Returns an empty string when valid.
    std::string check_level_set(std::size_t samples = 256) const
        requires(Dim == 2)
    {
        if (!(level_(center_) < 0.0)) return "level set is not negative at the center";
        for (std::size_t i = 0; i < samples; ++i) {
            const double a = kTwoPi * static_cast<double>(i) / static_cast<double>(samples);
            const double r = boundary_radius(a);
            const Vec2 u = unit_vector(a);
            if (!(norm(grad_(center_ + r * u)) > 0.0)) return "vanishing gradient on the boundary";
            if (!(level_(center_ + 0.99 * r * u) < 0.0)) return "level set not negative just inside the boundary";
            if (!(level_(center_ + 1.01 * r * u) > 0.0)) return "level set not positive just outside the boundary";
        }
        return {};
    }

  private:
    Domain() = default;

    Kind kind_ = Kind::ball;
    Point center_{};
    double radius_ = 1.0;
    double diameter_ = 2.0;
    LevelFn level_;
    GradFn grad_;
    std::shared_ptr<const Domain> enclosing_;
};

using Domain2 = Domain<2>;

}  // namespace curvtomo
