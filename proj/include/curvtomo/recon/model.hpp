#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "curvtomo/core/errors.hpp"
#include "curvtomo/core/grid.hpp"
#include "curvtomo/ray/ray_operator.hpp"
#include "curvtomo/ray/sinogram.hpp"
#include "curvtomo/transport/measure.hpp"
#include "curvtomo/transport/solver.hpp"

namespace curvtomo {

/// Linear map from grid images to boundary data with its exact adjoint for
/// the weighted products <f, h> = cell area * sum f h and
/// <g, d> = sum_q w_q g_q d_q.
class MeasurementModel {
  public:
    virtual ~MeasurementModel() = default;
    virtual std::vector<double> forward(const std::vector<double>& f) const = 0;
    virtual std::vector<double> adjoint(const std::vector<double>& g) const = 0;
    virtual const RayOperator& ray() const = 0;

    const SpatialGrid& grid() const { return ray().grid(); }
    const std::vector<BoundaryNode>& nodes() const { return ray().nodes(); }
    std::size_t image_size() const { return grid().size(); }
    std::size_t data_size() const { return nodes().size(); }

    double image_dot(const std::vector<double>& a, const std::vector<double>& b) const { return ray().image_dot(a, b); }
    double data_dot(const std::vector<double>& a, const std::vector<double>& b) const {
        double s = 0.0;
        const auto& n = nodes();
        for (std::size_t q = 0; q < n.size(); ++q) s += n[q].weight * a[q] * b[q];
        return s;
    }
    double image_norm(const std::vector<double>& a) const { return std::sqrt(image_dot(a, a)); }
    double data_norm(const std::vector<double>& a) const { return std::sqrt(data_dot(a, a)); }

    std::vector<double> normal(const std::vector<double>& f) const { return adjoint(forward(f)); }
};

/// Scattering-free measurement: the attenuated ray transform.
class RayModel final : public MeasurementModel {
  public:
    explicit RayModel(const RayOperator& r) : ray_(&r) {}
    std::vector<double> forward(const std::vector<double>& f) const override { return ray_->forward_values(f); }
    std::vector<double> adjoint(const std::vector<double>& g) const override { return ray_->adjoint_values(g); }
    const RayOperator& ray() const override { return *ray_; }

  private:
    const RayOperator* ray_;
};

/// Measurement with scattering: f -> A f + B K (I - T K)^{-1} T Pi f.
/// The adjoint is the transpose A^T + Pi^T T^T (I - K^T T^T)^{-1} K^T B^T of
/// the same discrete map, with both inverses computed by fixed-point
/// iteration to the transport tolerance.
class TransportModel final : public MeasurementModel {
  public:
    TransportModel(const MeasurementOperator& m, TransportOptions opts = {}) : m_(&m), opts_(opts) {}

    const RayOperator& ray() const override { return m_->ray(); }
    const MeasurementOperator& measurement() const { return *m_; }
    const TransportOptions& options() const { return opts_; }

    std::vector<double> forward(const std::vector<double>& f) const override {
        std::vector<double> out = ray().forward_values(f);
        if (!m_->has_scattering()) return out;
        const TransportOperator& tr = m_->transport();
        const auto sol = tr.solve(lift_to_phase(tr.grid(), f), opts_);
        require(sol, "forward");
        const auto bk = m_->scattered_part(sol.u);
        for (std::size_t q = 0; q < out.size(); ++q) out[q] += bk[q];
        return out;
    }

    std::vector<double> adjoint(const std::vector<double>& g) const override {
        std::vector<double> out = ray().adjoint_values(g);
        if (!m_->has_scattering()) return out;
        const TransportOperator& tr = m_->transport();
        const PhaseGrid& pg = tr.grid();
        const auto& nodes = ray().nodes();
        std::vector<double> wg(g.size());
        for (std::size_t q = 0; q < g.size(); ++q) wg[q] = nodes[q].weight * g[q];
        // v = K^T B^T (w g), then y = (I - K^T T^T)^{-1} v.
        std::vector<double> bt(pg.size()), v, y, tty(pg.size()), ktty;
        m_->boundary_rows().apply_transpose(wg, bt);
        tr.K().apply_transpose(bt, v);
        y = v;
        const double scale = phase_norm(pg, v);
        TransportSolution log;
        if (scale > 0.0) {
            std::size_t rising = 0;
            for (std::size_t m = 0; m < opts_.max_iter; ++m) {
                tr.T().apply_transpose(y, tty);
                tr.K().apply_transpose(tty, ktty);
                std::vector<double> diff(y.size());
                for (std::size_t k = 0; k < y.size(); ++k) {
                    const double next = v[k] + ktty[k];
                    if (!std::isfinite(next))
                        throw NumericalError("adjoint transport: non-finite value at iteration " + std::to_string(m + 1));
                    diff[k] = next - y[k];
                    y[k] = next;
                }
                const double r = phase_norm(pg, diff);
                if (!log.residual_history.empty()) rising = r > log.residual_history.back() ? rising + 1 : 0;
                log.residual_history.push_back(r);
                if (r <= opts_.tol * phase_norm(pg, y)) {
                    log.converged = true;
                    break;
                }
                if (rising >= opts_.divergence_window) {
                    log.diverged = true;
                    break;
                }
            }
            require(log, "adjoint");
        }
        // Pi^T T^T y, scaled to the image product.
        tr.T().apply_transpose(y, tty);
        const double inv = 1.0 / grid().cell_area();
        for (std::size_t i : pg.active()) {
            double s = 0.0;
            for (std::size_t j = 0; j < pg.n_theta(); ++j) s += tty[pg.index(i, j)];
            out[i] += s * inv;
        }
        return out;
    }

  private:
    static void require(const TransportSolution& s, const char* what) {
        if (s.converged) return;
        throw NumericalError(std::string(what) +
                             (s.diverged ? " transport iteration diverged: (sigma, k) is outside the numerically well-posed set"
                                         : " transport iteration did not converge"));
    }

    const MeasurementOperator* m_;
    TransportOptions opts_;
};

/// Inverse source problem: measurement model, reconstruction support mask
/// (inside the source domain) and Tikhonov weight.
struct InverseProblemSetup {
    std::shared_ptr<const MeasurementModel> model;
    Domain2 support;
    std::vector<std::uint8_t> mask;
    double epsilon = 0.0;

    InverseProblemSetup(std::shared_ptr<const MeasurementModel> m, const Domain2& support_domain, double eps = 0.0)
        : model(std::move(m)), support(support_domain), epsilon(eps) {
        if (!model) throw ArgumentError("InverseProblemSetup: missing measurement model");
        if (epsilon < 0.0) throw ArgumentError("InverseProblemSetup: epsilon must be nonnegative");
        mask = inside_mask(model->grid(), support);
        const Domain2& outer = model->ray().geometry().outer();
        for (std::size_t k = 0; k < mask.size(); ++k)
            if (mask[k] && !outer.contains(model->grid().center(k)))
                throw ArgumentError("InverseProblemSetup: support mask leaves the measurement domain");
    }

    /// Scattering-free setup on a ray operator.
    static InverseProblemSetup ray_only(const RayOperator& r, double eps = 0.0) {
        return InverseProblemSetup(std::make_shared<RayModel>(r), r.geometry().domain, eps);
    }

    /// Setup with scattering; the kernel must be separable (or zero).
    static InverseProblemSetup with_transport(const MeasurementOperator& m, TransportOptions opts = {},
                                              double eps = 0.0) {
        const ScatteringOperator& k = m.transport().K();
        if (!k.is_zero() && !k.is_separable())
            throw ArgumentError("InverseProblemSetup: scattering kernel must be separable");
        return InverseProblemSetup(std::make_shared<TransportModel>(m, opts), m.ray().geometry().domain, eps);
    }

    const SpatialGrid& grid() const { return model->grid(); }

    void apply_mask(std::vector<double>& f) const {
        for (std::size_t k = 0; k < f.size(); ++k)
            if (!mask[k]) f[k] = 0.0;
    }
    std::vector<double> forward(std::vector<double> f) const {
        apply_mask(f);
        return model->forward(f);
    }
    std::vector<double> adjoint(const std::vector<double>& g) const {
        auto h = model->adjoint(g);
        apply_mask(h);
        return h;
    }
    /// (P A* A P + eps) f
    std::vector<double> normal(const std::vector<double>& f) const {
        auto h = adjoint(forward(f));
        if (epsilon > 0.0)
            for (std::size_t k = 0; k < h.size(); ++k) h[k] += mask[k] ? epsilon * f[k] : 0.0;
        return h;
    }
};

}  // namespace curvtomo
