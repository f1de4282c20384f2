#pragma once

#include <cstddef>
#include <vector>

#include "curvtomo/core/errors.hpp"
#include "curvtomo/core/parallel.hpp"
#include "curvtomo/transport/fields.hpp"
#include "curvtomo/transport/phase_grid.hpp"

namespace curvtomo {

/// K on a phase grid:
///   (K u)(x_i, theta_j) = sum_j' k(x_i, theta_j, theta_j') u(x_i, theta_j') p(x_i) dv.
/// Kernel values are tabulated at construction: a dense n_theta x n_theta
/// block per node for general kernels, two vectors for separable ones.
class ScatteringOperator {
  public:
    ScatteringOperator(const PhaseGrid& pg, const ScatteringKernel& k) : pg_(&pg), zero_(k.is_zero()), separable_(k.is_separable()) {
        if (zero_) return;
        const std::size_t nt = pg.n_theta();
        if (separable_) {
            k1_.assign(pg.size(), 0.0);
            k2_.assign(pg.size(), 0.0);
        } else {
            block_.assign(pg.spatial().size() * nt * nt, 0.0);
        }
        parallel_for(pg.active().size(), [&](std::size_t a) {
            const std::size_t i = pg.active()[a];
            const Vec2 x = pg.spatial().center(i);
            const double q = pg.speed(i) * pg.dv();
            for (std::size_t j = 0; j < nt; ++j) {
                const Vec2 th = pg.velocity(i, j);
                if (separable_) {
                    k1_[pg.index(i, j)] = k.kappa1(x, th);
                    k2_[pg.index(i, j)] = k.kappa2(x, th) * q;
                } else {
                    for (std::size_t jp = 0; jp < nt; ++jp)
                        block_[(i * nt + j) * nt + jp] = k(x, th, pg.velocity(i, jp)) * q;
                }
            }
        });
    }

    const PhaseGrid& grid() const { return *pg_; }
    bool is_zero() const { return zero_; }
    bool is_separable() const { return separable_; }

    void apply(const std::vector<double>& u, std::vector<double>& out) const {
        if (u.size() != pg_->size()) throw ArgumentError("apply_K: grid mismatch");
        out.assign(u.size(), 0.0);
        if (zero_) return;
        const std::size_t nt = pg_->n_theta();
        parallel_for(pg_->active().size(), [&](std::size_t a) {
            const std::size_t i = pg_->active()[a];
            const std::size_t base = i * nt;
            if (separable_) {
                double s = 0.0;
                for (std::size_t jp = 0; jp < nt; ++jp) s += k2_[base + jp] * u[base + jp];
                for (std::size_t j = 0; j < nt; ++j) out[base + j] = k1_[base + j] * s;
            } else {
                for (std::size_t j = 0; j < nt; ++j) {
                    double s = 0.0;
                    const double* row = &block_[(base + j) * nt];
                    for (std::size_t jp = 0; jp < nt; ++jp) s += row[jp] * u[base + jp];
                    out[base + j] = s;
                }
            }
        });
    }

    /// K^T (plain transpose, no quadrature weights).
    void apply_transpose(const std::vector<double>& v, std::vector<double>& out) const {
        if (v.size() != pg_->size()) throw ArgumentError("apply_K: grid mismatch");
        out.assign(v.size(), 0.0);
        if (zero_) return;
        const std::size_t nt = pg_->n_theta();
        parallel_for(pg_->active().size(), [&](std::size_t a) {
            const std::size_t i = pg_->active()[a];
            const std::size_t base = i * nt;
            if (separable_) {
                double s = 0.0;
                for (std::size_t j = 0; j < nt; ++j) s += k1_[base + j] * v[base + j];
                for (std::size_t jp = 0; jp < nt; ++jp) out[base + jp] = k2_[base + jp] * s;
            } else {
                for (std::size_t jp = 0; jp < nt; ++jp) {
                    double s = 0.0;
                    for (std::size_t j = 0; j < nt; ++j) s += block_[(base + j) * nt + jp] * v[base + j];
                    out[base + jp] = s;
                }
            }
        });
    }

    /// Entry K[(i, j), (i, jp)].
    double entry(std::size_t i, std::size_t j, std::size_t jp) const {
        if (zero_) return 0.0;
        const std::size_t nt = pg_->n_theta();
        if (separable_) return k1_[i * nt + j] * k2_[i * nt + jp];
        return block_[(i * nt + j) * nt + jp];
    }

  private:
    const PhaseGrid* pg_;
    bool zero_;
    bool separable_;
    std::vector<double> k1_, k2_, block_;
};

inline PhaseFunction apply_K(const PhaseFunction& u, const ScatteringKernel& k) {
    if (!u.grid) throw ArgumentError("apply_K: phase function without grid");
    ScatteringOperator op(*u.grid, k);
    PhaseFunction out(*u.grid);
    op.apply(u.values, out.values);
    return out;
}

}  // namespace curvtomo
