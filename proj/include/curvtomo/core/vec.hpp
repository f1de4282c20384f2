#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>

namespace curvtomo {

/// Fixed-size real vector. Positions, velocities and gradients all use this.
template <std::size_t Dim>
struct Vec {
    std::array<double, Dim> c{};

    constexpr double& operator[](std::size_t i) { return c[i]; }
    constexpr double operator[](std::size_t i) const { return c[i]; }
    static constexpr std::size_t size() { return Dim; }

    friend constexpr Vec operator+(Vec a, const Vec& b) {
        for (std::size_t i = 0; i < Dim; ++i) a.c[i] += b.c[i];
        return a;
    }
    friend constexpr Vec operator-(Vec a, const Vec& b) {
        for (std::size_t i = 0; i < Dim; ++i) a.c[i] -= b.c[i];
        return a;
    }
    friend constexpr Vec operator-(Vec a) {
        for (auto& v : a.c) v = -v;
        return a;
    }
    friend constexpr Vec operator*(double s, Vec a) {
        for (auto& v : a.c) v *= s;
        return a;
    }
    friend constexpr Vec operator*(Vec a, double s) { return s * a; }
    friend constexpr Vec operator/(Vec a, double s) {
        for (auto& v : a.c) v /= s;
        return a;
    }
    constexpr Vec& operator+=(const Vec& b) {
        for (std::size_t i = 0; i < Dim; ++i) c[i] += b.c[i];
        return *this;
    }
    constexpr Vec& operator-=(const Vec& b) {
        for (std::size_t i = 0; i < Dim; ++i) c[i] -= b.c[i];
        return *this;
    }
    friend constexpr bool operator==(const Vec&, const Vec&) = default;

    friend std::ostream& operator<<(std::ostream& os, const Vec& v) {
        os << '(';
        for (std::size_t i = 0; i < Dim; ++i) os << (i ? ", " : "") << v.c[i];
        return os << ')';
    }
};

template <std::size_t Dim>
constexpr double dot(const Vec<Dim>& a, const Vec<Dim>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < Dim; ++i) s += a[i] * b[i];
    return s;
}

template <std::size_t Dim>
double norm(const Vec<Dim>& a) {
    return std::sqrt(dot(a, a));
}

/// Square matrix stored by rows.
template <std::size_t Dim>
struct Mat {
    std::array<Vec<Dim>, Dim> rows{};

    constexpr Vec<Dim>& operator[](std::size_t i) { return rows[i]; }
    constexpr const Vec<Dim>& operator[](std::size_t i) const { return rows[i]; }

    friend constexpr Vec<Dim> operator*(const Mat& m, const Vec<Dim>& v) {
        Vec<Dim> out;
        for (std::size_t i = 0; i < Dim; ++i) out[i] = dot(m.rows[i], v);
        return out;
    }
    friend constexpr Mat operator+(Mat a, const Mat& b) {
        for (std::size_t i = 0; i < Dim; ++i) a.rows[i] += b.rows[i];
        return a;
    }
    friend constexpr Mat operator*(double s, Mat a) {
        for (auto& r : a.rows) r = s * r;
        return a;
    }

    constexpr Mat transpose() const {
        Mat t;
        for (std::size_t i = 0; i < Dim; ++i)
            for (std::size_t j = 0; j < Dim; ++j) t[i][j] = rows[j][i];
        return t;
    }

    /// Max-abs entry norm.
    double max_abs() const {
        double m = 0.0;
        for (const auto& r : rows)
            for (double v : r.c) m = std::max(m, std::abs(v));
        return m;
    }
};

using Vec2 = Vec<2>;
using Mat2 = Mat<2>;

inline Vec2 unit_vector(double angle) { return Vec2{{std::cos(angle), std::sin(angle)}}; }

/// Counter-clockwise rotation by a quarter turn.
inline Vec2 perp(const Vec2& v) { return Vec2{{-v[1], v[0]}}; }

inline double cross(const Vec2& a, const Vec2& b) { return a[0] * b[1] - a[1] * b[0]; }

inline double angle_of(const Vec2& v) { return std::atan2(v[1], v[0]); }

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Wraps an angle into [0, 2*pi).
inline double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    if (a < 0.0) a += kTwoPi;
    if (a >= kTwoPi) a -= kTwoPi;
    return a;
}

}  // namespace curvtomo
