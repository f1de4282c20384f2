#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "curvtomo/core/errors.hpp"
#include "curvtomo/core/grid.hpp"

namespace curvtomo {

/// Scalar field sampled at the cell centres of a SpatialGrid, evaluated by
/// bicubic Hermite interpolation (C1). Node derivatives come from
/// fourth-order centred differences, dropping to second order within two
/// nodes of the edge. Evaluation outside the node hull is a DomainError.
class BicubicField {
  public:
    BicubicField() = default;
    explicit BicubicField(GridImage samples) : img_(std::move(samples)) {
        const auto& g = img_.grid;
        if (g.nx() < 3 || g.ny() < 3) throw ArgumentError("BicubicField: need at least 3x3 samples");
        fx_ = differentiate(img_.values, true);
        fy_ = differentiate(img_.values, false);
        fxy_ = differentiate(fx_, false);
    }

    const GridImage& samples() const { return img_; }

    /// Node values of d/dx (axis 0) or d/dy (axis 1) as a new field.
    BicubicField derivative_field(int axis) const {
        return BicubicField(GridImage(img_.grid, axis == 0 ? fx_ : fy_));
    }

    double operator()(const Vec2& x) const {
        const auto& g = img_.grid;
        const double fxi = (x[0] - g.box().x_min) / g.dx() - 0.5;
        const double fyi = (x[1] - g.box().y_min) / g.dy() - 0.5;
        const double last_x = static_cast<double>(g.nx() - 1), last_y = static_cast<double>(g.ny() - 1);
        constexpr double slack = 1e-12;
        if (!(fxi >= -slack && fxi <= last_x + slack && fyi >= -slack && fyi <= last_y + slack))
            throw DomainError("BicubicField: evaluation outside the sampled region");
        std::size_t i = static_cast<std::size_t>(std::clamp(std::floor(fxi), 0.0, last_x - 1.0));
        std::size_t j = static_cast<std::size_t>(std::clamp(std::floor(fyi), 0.0, last_y - 1.0));
        const double t = fxi - static_cast<double>(i), u = fyi - static_cast<double>(j);
        const double hx = g.dx(), hy = g.dy();

        const double ht[2][2] = {{h00(t), h01(t)}, {h10(t), h11(t)}};
        const double hu[2][2] = {{h00(u), h01(u)}, {h10(u), h11(u)}};
        double v = 0.0;
        for (int b = 0; b < 2; ++b) {
            for (int a = 0; a < 2; ++a) {
                const std::size_t idx = g.index(i + a, j + b);
                v += img_.values[idx] * ht[0][a] * hu[0][b];
                v += hx * fx_[idx] * ht[1][a] * hu[0][b];
                v += hy * fy_[idx] * ht[0][a] * hu[1][b];
                v += hx * hy * fxy_[idx] * ht[1][a] * hu[1][b];
            }
        }
        return v;
    }

  private:
    static double h00(double t) { return (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t); }
    static double h01(double t) { return t * t * (3.0 - 2.0 * t); }
    static double h10(double t) { return t * (1.0 - t) * (1.0 - t); }
    static double h11(double t) { return t * t * (t - 1.0); }

    std::vector<double> differentiate(const std::vector<double>& f, bool along_x) const {
        const auto& g = img_.grid;
        const std::size_t n = along_x ? g.nx() : g.ny();
        const double h = along_x ? g.dx() : g.dy();
        std::vector<double> d(f.size());
        for (std::size_t j = 0; j < g.ny(); ++j) {
            for (std::size_t i = 0; i < g.nx(); ++i) {
                const std::size_t k = along_x ? i : j;
                auto at = [&](long off) {
                    const long kk = static_cast<long>(k) + off;
                    return along_x ? f[g.index(kk, j)] : f[g.index(i, kk)];
                };
                double v;
                if (k >= 2 && k + 2 < n)
                    v = (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2)) / (12.0 * h);
                else if (k >= 1 && k + 1 < n)
                    v = (at(1) - at(-1)) / (2.0 * h);
                else if (k == 0)
                    v = (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
                else
                    v = (3.0 * at(0) - 4.0 * at(-1) + at(-2)) / (2.0 * h);
                d[g.index(i, j)] = v;
            }
        }
        return d;
    }

    GridImage img_;
    std::vector<double> fx_, fy_, fxy_;
};

}  // namespace curvtomo
