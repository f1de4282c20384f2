#pragma once

#include <cstddef>
#include <vector>

#include "curvtomo/core/errors.hpp"
#include "curvtomo/core/sparse.hpp"
#include "curvtomo/geometry/boundary_nodes.hpp"
#include "curvtomo/ray/ray_operator.hpp"
#include "curvtomo/ray/sinogram.hpp"
#include "curvtomo/transport/characteristic.hpp"
#include "curvtomo/transport/solver.hpp"

namespace curvtomo {

/// Rows of the backward characteristic quadrature from boundary nodes onto
/// phase nodes (the boundary trace of T_1^{-1} applied to a phase function).
inline SparseMatrix build_boundary_phase_rows(const Geometry& geo, const PhaseGrid& pg, const AttenuationField& sigma,
                                              const std::vector<BoundaryNode>& nodes) {
    const ResolvedStep rs = resolve_options(geo.integrator, geo.outer(), geo.shell);
    return build_sparse_rows(nodes.size(), pg.size(), [&](std::size_t q, RowAccumulator& acc) {
        const PhaseState2 st{nodes[q].x, nodes[q].theta};
        trace_backward(st, geo.outer(), geo.force(), sigma, rs, q,
                       [&](double w, const Vec2& x, const Vec2& th) { add_phase(acc, pg, w, x, th); });
    });
}

/// Boundary measurement of the transport solution on the outgoing nodes of
/// the ray operator: u|_{d+} = A f + B K u, where A is the ray transform
/// matrix and B traces each node backward onto the phase grid. Both use the
/// same characteristic quadrature, so with k = 0 the measurement equals the
/// ray transform exactly.
class MeasurementOperator {
  public:
    MeasurementOperator(const TransportOperator& transport, const RayOperator& ray) : tr_(&transport), ray_(&ray) {
        if (!(transport.grid().spatial() == ray.grid()))
            throw ArgumentError("MeasurementOperator: ray and phase grids differ");
        if (!transport.K().is_zero())
            B_ = build_boundary_phase_rows(ray.geometry(), transport.grid(), ray.sigma(), ray.nodes());
    }

    const TransportOperator& transport() const { return *tr_; }
    const RayOperator& ray() const { return *ray_; }
    bool has_scattering() const { return !tr_->K().is_zero(); }
    /// Boundary-to-phase rows B (empty without scattering).
    const SparseMatrix& boundary_rows() const { return B_; }

    /// B K u for a phase function u.
    std::vector<double> scattered_part(const PhaseFunction& u) const {
        std::vector<double> out(ray_->nodes().size(), 0.0);
        if (!has_scattering()) return out;
        std::vector<double> ku;
        tr_->K().apply(u.values, ku);
        B_.apply(ku, out);
        return out;
    }

    /// Sinogram of a transport solution for the source f.
    BoundarySinogram measure(const SourceImage& f, const PhaseFunction& u) const {
        BoundarySinogram s = ray_->forward(f);
        const auto bk = scattered_part(u);
        for (std::size_t q = 0; q < bk.size(); ++q) s.values[q] += bk[q];
        return s;
    }

    struct Result {
        BoundarySinogram sinogram;
        TransportSolution solution;
    };

    /// Solves the forward problem and measures. Throws NumericalError when
    /// the fixed-point iteration diverges or fails to converge.
    Result measure(const SourceImage& f, const TransportOptions& opts = {}) const {
        Result r;
        if (has_scattering()) {
            r.solution = tr_->solve(f, opts);
            if (!r.solution.converged)
                throw NumericalError(r.solution.diverged
                                         ? "measure: transport iteration diverged; (sigma, k) outside the well-posed regime"
                                         : "measure: transport iteration did not converge");
        } else {
            r.solution.u = PhaseFunction(tr_->grid());
            r.solution.converged = true;
        }
        r.sinogram = measure(f, r.solution.u);
        return r;
    }

  private:
    const TransportOperator* tr_;
    const RayOperator* ray_;
    SparseMatrix B_;
};

/// Measurement at arbitrary boundary nodes, by direct backward tracing of
/// the source and of K u. Nodes on the incoming side trace out of the domain
/// immediately and measure exactly zero.
inline std::vector<double> measure_at_nodes(const TransportOperator& tr, const SourceImage& f, const PhaseFunction& u,
                                            const std::vector<BoundaryNode>& nodes) {
    const Geometry& geo = tr.geometry();
    const PhaseGrid& pg = tr.grid();
    std::vector<double> q = tr.lift(f).values;
    if (!tr.K().is_zero()) {
        std::vector<double> ku;
        tr.K().apply(u.values, ku);
        for (std::size_t k = 0; k < q.size(); ++k) q[k] += ku[k];
    }
    const SparseMatrix rows = build_boundary_phase_rows(geo, pg, tr.sigma(), nodes);
    std::vector<double> out(nodes.size());
    rows.apply(q, out);
    return out;
}

}  // namespace curvtomo
