#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <string>
#include <utility>

#include "curvtomo/core/errors.hpp"
#include "curvtomo/core/grid.hpp"
#include "curvtomo/core/vec.hpp"

namespace curvtomo {

/// Attenuation sigma(x, theta).
class AttenuationField {
  public:
    using Fn = std::function<double(const Vec2&, const Vec2&)>;

    AttenuationField() = default;
    AttenuationField(Fn f, bool nonnegative) : fn_(std::move(f)), nonnegative_(nonnegative) {}

    static AttenuationField zero() { return AttenuationField(); }
    static AttenuationField constant(double mu) {
        return AttenuationField([mu](const Vec2&, const Vec2&) { return mu; }, mu >= 0.0);
    }
    /// Velocity-independent attenuation sampled on a grid (bilinear).
    static AttenuationField from_image(const GridImage& img) {
        bool nonneg = true;
        for (double v : img.values) nonneg = nonneg && v >= 0.0;
        return AttenuationField([img](const Vec2& x, const Vec2&) { return img.grid.interpolate(img.values, x); },
                                nonneg);
    }

    bool is_zero() const { return !fn_; }
    bool nonnegative() const { return nonnegative_; }
    double operator()(const Vec2& x, const Vec2& theta) const {
        if (!fn_) return 0.0;
        const double v = fn_(x, theta);
        if (nonnegative_ && v < 0.0) throw DomainError("AttenuationField: negative value on a nonnegative field");
        return v;
    }

  private:
    Fn fn_;
    bool nonnegative_ = true;
};

/// Scattering kernel k(x, theta, theta'), either a general callable or the
/// separable product kappa1(x, theta) * kappa2(x, theta').
class ScatteringKernel {
  public:
    using General = std::function<double(const Vec2&, const Vec2&, const Vec2&)>;
    using Factor = std::function<double(const Vec2&, const Vec2&)>;

    ScatteringKernel() = default;

    static ScatteringKernel zero() { return ScatteringKernel(); }
    static ScatteringKernel general(General k) {
        ScatteringKernel s;
        s.general_ = std::move(k);
        return s;
    }
    static ScatteringKernel separable(Factor kappa1, Factor kappa2) {
        ScatteringKernel s;
        s.k1_ = std::move(kappa1);
        s.k2_ = std::move(kappa2);
        return s;
    }

    bool is_zero() const { return !general_ && !k1_; }
    bool is_separable() const { return static_cast<bool>(k1_); }

    double operator()(const Vec2& x, const Vec2& theta, const Vec2& theta_in) const {
        if (general_) return general_(x, theta, theta_in);
        if (k1_) return k1_(x, theta) * k2_(x, theta_in);
        return 0.0;
    }
    double kappa1(const Vec2& x, const Vec2& theta) const { return k1_ ? k1_(x, theta) : 0.0; }
    double kappa2(const Vec2& x, const Vec2& theta_in) const { return k2_ ? k2_(x, theta_in) : 0.0; }

    /// lambda * k, keeping the representation.
    ScatteringKernel scaled(double lambda) const {
        if (general_) return general([g = general_, lambda](const Vec2& x, const Vec2& a, const Vec2& b) { return lambda * g(x, a, b); });
        if (k1_) return separable([f = k1_, lambda](const Vec2& x, const Vec2& a) { return lambda * f(x, a); }, k2_);
        return zero();
    }

    /// Same kernel through the general-callable path.
    ScatteringKernel as_general() const {
        if (!k1_) return *this;
        return general([a = k1_, b = k2_](const Vec2& x, const Vec2& t, const Vec2& tp) { return a(x, t) * b(x, tp); });
    }

    /// Max |k - kappa1 kappa2| over random samples in the box (zero for
    /// non-separable kernels).
    double separable_defect(const Box& box, std::size_t samples, unsigned seed = 1) const {
        if (!k1_) return 0.0;
        std::mt19937 rng(seed);
        std::uniform_real_distribution<double> ux(box.x_min, box.x_max), uy(box.y_min, box.y_max), ua(0.0, 6.283185307179586);
        double d = 0.0;
        for (std::size_t i = 0; i < samples; ++i) {
            const Vec2 x{{ux(rng), uy(rng)}};
            const Vec2 t = unit_vector(ua(rng)), tp = unit_vector(ua(rng));
            d = std::max(d, std::abs((*this)(x, t, tp) - k1_(x, t) * k2_(x, tp)));
        }
        return d;
    }

  private:
    General general_;
    Factor k1_, k2_;
};

}  // namespace curvtomo
