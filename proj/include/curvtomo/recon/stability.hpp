#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "curvtomo/core/grid.hpp"
#include "curvtomo/recon/model.hpp"

namespace curvtomo {

/// Discrete H1 norm over the masked nodes: sum (g^2 + |grad g|^2) * cell
/// area, with centered differences where both neighbours are in the mask,
/// one-sided differences where only one is, and zero otherwise.
inline double discrete_h1_norm(const SpatialGrid& grid, const std::vector<std::uint8_t>& mask, const std::vector<double>& g) {
    const std::size_t nx = grid.nx(), ny = grid.ny();
    auto in = [&](long i, long j) {
        return i >= 0 && j >= 0 && i < static_cast<long>(nx) && j < static_cast<long>(ny) &&
               mask[grid.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j))];
    };
    auto val = [&](long i, long j) { return g[grid.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j))]; };
    auto diff = [&](long i, long j, long di, long dj, double h) {
        const bool p = in(i + di, j + dj), m = in(i - di, j - dj);
        if (p && m) return (val(i + di, j + dj) - val(i - di, j - dj)) / (2.0 * h);
        if (p) return (val(i + di, j + dj) - val(i, j)) / h;
        if (m) return (val(i, j) - val(i - di, j - dj)) / h;
        return 0.0;
    };
    double s = 0.0;
    for (long j = 0; j < static_cast<long>(ny); ++j)
        for (long i = 0; i < static_cast<long>(nx); ++i) {
            if (!in(i, j)) continue;
            const double v = val(i, j), gx = diff(i, j, 1, 0, grid.dx()), gy = diff(i, j, 0, 1, grid.dy());
            s += v * v + gx * gx + gy * gy;
        }
    return std::sqrt(s * grid.cell_area());
}

struct StabilitySample {
    double f_norm = 0.0;
    double normal_h1 = 0.0;
    /// f_norm / normal_h1 (NaN when both vanish).
    double ratio = 0.0;
};

struct StabilityReport {
    std::vector<StabilitySample> samples;
    /// Largest ratio: the empirical stability constant.
    double constant = 0.0;
    double min_ratio = 0.0;
    /// max / min ratio over the ensemble.
    double spread = 0.0;
    bool finite = true;
};

/// ||f||_{L2(support)} against ||A* A f||_{H1(outer domain)} over an ensemble.
inline StabilityReport stability_probe(const InverseProblemSetup& s, const std::vector<SourceImage>& phantoms) {
    const MeasurementModel& A = *s.model;
    const auto outer_mask = inside_mask(A.grid(), A.ray().geometry().outer());
    StabilityReport rep;
    rep.min_ratio = std::numeric_limits<double>::infinity();
    for (const auto& ph : phantoms) {
        std::vector<double> f = ph.values();
        s.apply_mask(f);
        StabilitySample smp;
        double ss = 0.0;
        for (std::size_t k = 0; k < f.size(); ++k) ss += f[k] * f[k];
        smp.f_norm = std::sqrt(ss * A.grid().cell_area());
        const auto nf = A.normal(f);
        smp.normal_h1 = discrete_h1_norm(A.grid(), outer_mask, nf);
        if (smp.f_norm == 0.0 && smp.normal_h1 == 0.0) {
            smp.ratio = std::numeric_limits<double>::quiet_NaN();
        } else {
            smp.ratio = smp.f_norm / smp.normal_h1;
            rep.finite = rep.finite && std::isfinite(smp.ratio);
            rep.constant = std::max(rep.constant, smp.ratio);
            rep.min_ratio = std::min(rep.min_ratio, smp.ratio);
        }
        rep.samples.push_back(smp);
    }
    rep.spread = rep.min_ratio > 0.0 && std::isfinite(rep.min_ratio) ? rep.constant / rep.min_ratio : 0.0;
    return rep;
}

}  // namespace curvtomo
