#pragma once

#include <cstddef>
#include <vector>

#include "curvtomo/core/errors.hpp"
#include "curvtomo/core/grid.hpp"
#include "curvtomo/core/sparse.hpp"
#include "curvtomo/geometry/boundary_nodes.hpp"
#include "curvtomo/ray/sinogram.hpp"
#include "curvtomo/transport/characteristic.hpp"
#include "curvtomo/transport/fields.hpp"
#include "curvtomo/transport/phase_grid.hpp"

namespace curvtomo {

struct RayOperatorOptions {
    std::size_t n_positions = 180;
    std::size_t n_directions = 90;
    AngularRule angular_rule = AngularRule::midpoint;
};

/// Attenuated ray transform along the force-field trajectories, measured on
/// the outgoing boundary of the outer domain. Each node's backward
/// characteristic is traced once at build time and stored as a sparse row
/// (trapezoid weight * W * bilinear weight), so forward and transpose use
/// the same matrix.
class RayOperator {
  public:
    RayOperator(const Geometry& geo, AttenuationField sigma, const SpatialGrid& grid, const RayOperatorOptions& o = {})
        : geo_(&geo), sigma_(std::move(sigma)), grid_(grid), opts_(o) {
        BoundaryNodeOptions bo;
        bo.angular_rule = o.angular_rule;
        nodes_ = boundary_measure_nodes(geo.outer(), geo.shell, o.n_positions, o.n_directions, bo);
        const ResolvedStep rs = resolve_options(geo.integrator, geo.outer(), geo.shell);
        A_ = build_sparse_rows(nodes_.size(), grid.size(), [&](std::size_t q, RowAccumulator& acc) {
            const PhaseState2 st{nodes_[q].x, nodes_[q].theta};
            trace_backward(st, geo.outer(), geo.force(), sigma_, rs, q,
                           [&](double w, const Vec2& x, const Vec2&) { add_spatial(acc, grid_, w, x); });
        });
    }

    const Geometry& geometry() const { return *geo_; }
    const AttenuationField& sigma() const { return sigma_; }
    const SpatialGrid& grid() const { return grid_; }
    const std::vector<BoundaryNode>& nodes() const { return nodes_; }
    const SparseMatrix& matrix() const { return A_; }
    const RayOperatorOptions& options() const { return opts_; }

    BoundarySinogram empty_sinogram() const {
        return BoundarySinogram(nodes_, opts_.n_positions, opts_.n_directions, DomainTag::outer);
    }

    /// Raw matrix product on grid values.
    std::vector<double> forward_values(const std::vector<double>& f) const {
        if (f.size() != grid_.size()) throw ArgumentError("RayOperator::forward: grid mismatch");
        std::vector<double> out(nodes_.size());
        A_.apply(f, out);
        return out;
    }

    BoundarySinogram forward(const SourceImage& f) const {
        if (!(f.grid() == grid_)) throw ArgumentError("RayOperator::forward: grid mismatch");
        BoundarySinogram s = empty_sinogram();
        s.values = forward_values(f.values());
        return s;
    }

    /// Exact adjoint with respect to the weighted sinogram product and the
    /// cell-area image product: (1 / cell area) A^T (w . g).
    std::vector<double> adjoint_values(const std::vector<double>& g) const {
        if (g.size() != nodes_.size()) throw ArgumentError("RayOperator::adjoint: node set mismatch");
        std::vector<double> wg(g.size());
        for (std::size_t q = 0; q < g.size(); ++q) wg[q] = nodes_[q].weight * g[q];
        std::vector<double> out(grid_.size());
        A_.apply_transpose(wg, out);
        const double inv = 1.0 / grid_.cell_area();
        for (double& v : out) v *= inv;
        return out;
    }

    GridImage adjoint(const BoundarySinogram& g) const {
        if (g.size() != nodes_.size() || g.n_positions != opts_.n_positions)
            throw ArgumentError("RayOperator::adjoint: node set mismatch");
        return GridImage(grid_, adjoint_values(g.values));
    }

    /// I* I f
    GridImage normal(const std::vector<double>& f) const { return GridImage(grid_, adjoint_values(forward_values(f))); }

    double image_dot(const std::vector<double>& a, const std::vector<double>& b) const {
        double s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
        return s * grid_.cell_area();
    }

  private:
    const Geometry* geo_;
    AttenuationField sigma_;
    SpatialGrid grid_;
    RayOperatorOptions opts_;
    std::vector<BoundaryNode> nodes_;
    SparseMatrix A_;
};

}  // namespace curvtomo
