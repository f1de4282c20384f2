#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "curvtomo/core/errors.hpp"
#include "curvtomo/core/grid.hpp"
#include "curvtomo/core/sparse.hpp"
#include "curvtomo/core/vec.hpp"
#include "curvtomo/geometry/trajectory.hpp"
#include "curvtomo/transport/fields.hpp"
#include "curvtomo/transport/phase_grid.hpp"

namespace curvtomo {

/// Quadrature of the backward characteristic integral
///   int_{ell_-}^0 W(s) q(gamma(s), gamma'(s)) ds,  W(s) = exp(-int_s^0 sigma),
/// by the composite trapezoid rule over the integrator samples, with W
/// accumulated by the same rule. sink(weight, x, theta) receives one call per
/// sample. Returns ell_-. A trapped trajectory throws TrappedError(node).
template <class Sink>
double trace_backward(const PhaseState2& start, const Domain2& domain, const ForceField2& force,
                      const AttenuationField& sigma, const ResolvedStep& rs, std::size_t node, Sink&& sink) {
    std::vector<double> s;
    std::vector<PhaseState2> st;
    const auto r = integrate_to_exit(start, -1.0, domain, force, rs, [&](double t, const PhaseState2& p) {
        s.push_back(t);
        st.push_back(p);
    });
    if (r.trapped) throw TrappedError(node, "backward characteristic did not exit");
    const std::size_t n = s.size();
    if (n < 2) return r.s;
    std::vector<double> sig(n, 0.0);
    if (!sigma.is_zero())
        for (std::size_t k = 0; k < n; ++k) sig[k] = sigma(st[k].x, st[k].theta);
    double cum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (k > 0) cum += 0.5 * (s[k - 1] - s[k]) * (sig[k - 1] + sig[k]);
        const double left = k > 0 ? s[k - 1] - s[k] : 0.0;
        const double right = k + 1 < n ? s[k] - s[k + 1] : 0.0;
        const double w = 0.5 * (left + right) * std::exp(-cum);
        if (w != 0.0) sink(w, st[k].x, st[k].theta);
    }
    return r.s;
}

/// Adds the bilinear spreading of a quadrature sample to a row over spatial
/// grid nodes.
inline void add_spatial(RowAccumulator& acc, const SpatialGrid& g, double w, const Vec2& x) {
    const auto b = g.bilinear(x);
    for (std::size_t k = 0; k < b.count; ++k) acc.add(b.entries[k].index, w * b.entries[k].weight);
}

/// Adds a sample to a row over phase nodes: bilinear in space (active nodes
/// only) times periodic linear interpolation in the direction angle.
inline void add_phase(RowAccumulator& acc, const PhaseGrid& pg, double w, const Vec2& x, const Vec2& theta) {
    const auto b = pg.spatial().bilinear(x);
    const std::size_t n = pg.n_theta();
    const double a = wrap_angle(angle_of(theta)) / pg.dv();
    std::size_t j0 = static_cast<std::size_t>(std::floor(a));
    const double t = a - static_cast<double>(j0);
    j0 %= n;
    const std::size_t j1 = (j0 + 1) % n;
    for (std::size_t k = 0; k < b.count; ++k) {
        const std::size_t i = b.entries[k].index;
        if (!pg.inside(i)) continue;
        const double bw = w * b.entries[k].weight;
        if (t != 1.0) acc.add(static_cast<std::uint32_t>(pg.index(i, j0)), bw * (1.0 - t));
        if (t != 0.0) acc.add(static_cast<std::uint32_t>(pg.index(i, j1)), bw * t);
    }
}

/// The discrete T_1^{-1} on a phase grid: row (x_i, p(x_i) v_j) holds the
/// characteristic quadrature of a phase function traced backward in the
/// outer domain. Rows of nodes outside the domain are empty.
inline SparseMatrix build_characteristic_matrix(const Geometry& geo, const PhaseGrid& pg, const AttenuationField& sigma) {
    const Domain2& dom = geo.outer();
    const ResolvedStep rs = resolve_options(geo.integrator, dom, geo.shell);
    const std::size_t nt = pg.n_theta();
    return build_sparse_rows(pg.size(), pg.size(), [&](std::size_t row, RowAccumulator& acc) {
        const std::size_t i = row / nt, j = row % nt;
        if (!pg.inside(i)) return;
        const PhaseState2 st{pg.spatial().center(i), pg.velocity(i, j)};
        trace_backward(st, dom, geo.force(), sigma, rs, row,
                       [&](double w, const Vec2& x, const Vec2& th) { add_phase(acc, pg, w, x, th); });
    });
}

}  // namespace curvtomo
