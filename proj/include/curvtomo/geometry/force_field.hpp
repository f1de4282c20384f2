#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>

#include "curvtomo/core/errors.hpp"
#include "curvtomo/core/vec.hpp"
#include "curvtomo/geometry/bicubic_field.hpp"

namespace curvtomo {

/// External force F(x, theta) = -grad phi(x) + Y(x) theta with a scalar
/// potential phi and a skew-symmetric matrix field Y. Immutable; copies share
/// the underlying callables.
template <std::size_t Dim>
class ForceField {
  public:
    using Point = Vec<Dim>;
    using Matrix = Mat<Dim>;
    using ScalarFn = std::function<double(const Point&)>;
    using VectorFn = std::function<Point(const Point&)>;
    using MatrixFn = std::function<Matrix(const Point&)>;

    /// phi = 0, Y = 0.
    static ForceField zero() { return ForceField(); }

    static ForceField potential(ScalarFn phi, VectorFn grad, std::string name) {
        ForceField f;
        f.phi_ = std::move(phi);
        f.grad_ = std::move(grad);
        f.name_ = std::move(name);
        return f;
    }

    static ForceField magnetic(MatrixFn y, std::string name) {
        ForceField f;
        f.y_ = std::move(y);
        f.name_ = std::move(name);
        return f;
    }

    /// phi = kappa |x - c|^2.
    static ForceField harmonic(double kappa, const Point& c = Point{}) {
        return potential([kappa, c](const Point& x) { const Point r = x - c; return kappa * dot(r, r); },
                         [kappa, c](const Point& x) { return 2.0 * kappa * (x - c); },
                         "harmonic(kappa=" + std::to_string(kappa) + ")");
    }

    /// phi = A exp(-|x - c|^2 / w^2).
    static ForceField gaussian_bump(double amplitude, double width, const Point& c = Point{}) {
        if (!(width > 0.0)) throw ArgumentError("gaussian_bump: width must be positive");
        const double w2 = width * width;
        return potential(
            [=](const Point& x) { const Point r = x - c; return amplitude * std::exp(-dot(r, r) / w2); },
            [=](const Point& x) {
                const Point r = x - c;
                return (-2.0 * amplitude / w2 * std::exp(-dot(r, r) / w2)) * r;
            },
            "gaussian(A=" + std::to_string(amplitude) + ",w=" + std::to_string(width) + ")");
    }

    /// Y = b [[0, 1], [-1, 0]]: trajectories at speed p are circles of radius p / |b|.
    static ForceField constant_magnetic(double b)
        requires(Dim == 2)
    {
        return magnetic([b](const Point&) { return rotation_generator(b); },
                        "magnetic(b=" + std::to_string(b) + ")");
    }

    /// Y = b(|x - c|) [[0, 1], [-1, 0]] with b(r) = b0 exp(-r^2 / w^2).
    static ForceField radial_magnetic(double b0, double width, const Point& c = Point{})
        requires(Dim == 2)
    {
        if (!(width > 0.0)) throw ArgumentError("radial_magnetic: width must be positive");
        const double w2 = width * width;
        return magnetic(
            [=](const Point& x) { const Point r = x - c; return rotation_generator(b0 * std::exp(-dot(r, r) / w2)); },
            "radial_magnetic(b0=" + std::to_string(b0) + ",w=" + std::to_string(width) + ")");
    }

    /// Grid-sampled potential (bicubic) with gradient from fourth-order
    /// differences of the samples.
    static ForceField grid_potential(const BicubicField& phi)
        requires(Dim == 2)
    {
        const BicubicField gx = phi.derivative_field(0), gy = phi.derivative_field(1);
        return potential([phi](const Point& x) { return phi(x); },
                         [gx, gy](const Point& x) { return Point{{gx(x), gy(x)}}; }, "grid_potential");
    }

    /// Grid-sampled magnetic strength b(x), Y = b(x) [[0, 1], [-1, 0]].
    static ForceField grid_magnetic(const BicubicField& b)
        requires(Dim == 2)
    {
        return magnetic([b](const Point& x) { return rotation_generator(b(x)); }, "grid_magnetic");
    }

    /// Sum of two fields (potentials and magnetic parts add).
    ForceField plus(const ForceField& other) const {
        ForceField f;
        f.name_ = name_ + "+" + other.name_;
        if (phi_ && other.phi_) {
            f.phi_ = [a = phi_, b = other.phi_](const Point& x) { return a(x) + b(x); };
            f.grad_ = [a = grad_, b = other.grad_](const Point& x) { return a(x) + b(x); };
        } else {
            f.phi_ = phi_ ? phi_ : other.phi_;
            f.grad_ = phi_ ? grad_ : other.grad_;
        }
        if (y_ && other.y_)
            f.y_ = [a = y_, b = other.y_](const Point& x) { return a(x) + b(x); };
        else
            f.y_ = y_ ? y_ : other.y_;
        return f;
    }

    /// Same potential, Y replaced by -Y (the field seen by time-reversed motion).
    ForceField with_reversed_magnetic() const {
        ForceField f = *this;
        if (y_) f.y_ = [y = y_](const Point& x) { return -1.0 * y(x); };
        f.name_ = name_ + "[-Y]";
        return f;
    }

    bool has_potential() const { return static_cast<bool>(phi_); }
    bool has_magnetic() const { return static_cast<bool>(y_); }
    const std::string& name() const { return name_; }

    double potential(const Point& x) const { return phi_ ? phi_(x) : 0.0; }
    Point potential_gradient(const Point& x) const { return phi_ ? grad_(x) : Point{}; }
    Matrix magnetic(const Point& x) const { return y_ ? y_(x) : Matrix{}; }

    /// -grad phi(x) + Y(x) theta
    Point acceleration(const Point& x, const Point& theta) const {
        Point a = phi_ ? -grad_(x) : Point{};
        if (y_) a += y_(x) * theta;
        return a;
    }

    /// max |Y + Y^T| at x.
    double skew_defect(const Point& x) const {
        const Matrix y = magnetic(x);
        return (y + y.transpose()).max_abs();
    }

  private:
    static Matrix rotation_generator(double b) {
        Matrix m;
        if constexpr (Dim == 2) {
            m[0][1] = b;
            m[1][0] = -b;
        }
        return m;
    }

    ForceField() : name_("zero") {}

    ScalarFn phi_;
    VectorFn grad_;
    MatrixFn y_;
    std::string name_;
};

using ForceField2 = ForceField<2>;

}  // namespace curvtomo
