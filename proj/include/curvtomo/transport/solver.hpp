#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "curvtomo/core/errors.hpp"
#include "curvtomo/core/sparse.hpp"
#include "curvtomo/transport/characteristic.hpp"
#include "curvtomo/transport/fields.hpp"
#include "curvtomo/transport/phase_grid.hpp"
#include "curvtomo/transport/scattering.hpp"

namespace curvtomo {

struct TransportOptions {
    double tol = 1e-10;
    std::size_t max_iter = 500;
    /// Iteration stops as diverged after this many consecutive residual
    /// increases.
    std::size_t divergence_window = 25;
};

struct TransportSolution {
    PhaseFunction u;
    std::size_t iterations = 0;
    /// ||u^{m+1} - u^m|| for m = 0, 1, ...
    std::vector<double> residual_history;
    bool converged = false;
    bool diverged = false;
    /// Last residual ratio ||u^{m+1} - u^m|| / ||u^m - u^{m-1}||.
    double contraction = 0.0;
};

/// Discrete forward transport on a phase grid: the cached characteristic
/// matrix T (the discrete T_1^{-1}) and the scattering operator K.
class TransportOperator {
  public:
    TransportOperator(const Geometry& geo, const PhaseGrid& pg, AttenuationField sigma, const ScatteringKernel& k)
        : geo_(&geo), pg_(&pg), sigma_(std::move(sigma)), K_(pg, k), T_(build_characteristic_matrix(geo, pg, sigma_)) {}

    const PhaseGrid& grid() const { return *pg_; }
    const Geometry& geometry() const { return *geo_; }
    const AttenuationField& sigma() const { return sigma_; }
    const ScatteringOperator& K() const { return K_; }
    const SparseMatrix& T() const { return T_; }

    /// T_1^{-1} q for a phase function q.
    PhaseFunction apply_T1_inverse(const PhaseFunction& q) const {
        check(q);
        PhaseFunction out(*pg_);
        T_.apply(q.values, out.values);
        return out;
    }

    /// T_1^{-1} applied to a velocity-independent source.
    PhaseFunction apply_T1_inverse(const SourceImage& f) const { return apply_T1_inverse(lift(f)); }

    PhaseFunction lift(const SourceImage& f) const {
        if (!(f.grid() == pg_->spatial())) throw ArgumentError("transport: source grid does not match the phase grid");
        return lift_to_phase(*pg_, f.values());
    }

    /// Fixed-point iteration u^0 = T Pi f, u^{m+1} = T K u^m + u^0.
    TransportSolution solve(const PhaseFunction& source, const TransportOptions& opts = {}) const {
        check(source);
        TransportSolution sol;
        const PhaseFunction u0 = apply_T1_inverse(source);
        if (!u0.finite()) throw NumericalError("solve_transport: non-finite value at iteration 0");
        PhaseFunction u = u0;
        std::vector<double> ku, tku;
        std::size_t rising = 0;
        for (std::size_t m = 0; m < opts.max_iter; ++m) {
            K_.apply(u.values, ku);
            tku.assign(ku.size(), 0.0);
            if (!K_.is_zero()) T_.apply(ku, tku);
            PhaseFunction next(*pg_);
            for (std::size_t q = 0; q < next.values.size(); ++q) next.values[q] = tku[q] + u0.values[q];
            if (!next.finite())
                throw NumericalError("solve_transport: non-finite value at iteration " + std::to_string(m + 1));
            std::vector<double> diff(next.values.size());
            for (std::size_t q = 0; q < diff.size(); ++q) diff[q] = next.values[q] - u.values[q];
            const double r = phase_norm(*pg_, diff);
            const double base = phase_norm(*pg_, u.values);
            if (!sol.residual_history.empty()) {
                const double prev = sol.residual_history.back();
                sol.contraction = prev > 0.0 ? r / prev : 0.0;
                rising = r > prev ? rising + 1 : 0;
            }
            sol.residual_history.push_back(r);
            u = std::move(next);
            sol.iterations = m + 1;
            if (r <= opts.tol * base) {
                sol.converged = true;
                break;
            }
            if (rising >= opts.divergence_window) {
                sol.diverged = true;
                break;
            }
        }
        if (!sol.converged && !sol.diverged && sol.contraction > 1.0) sol.diverged = true;
        sol.u = std::move(u);
        return sol;
    }

    TransportSolution solve(const SourceImage& f, const TransportOptions& opts = {}) const { return solve(lift(f), opts); }

    /// Phase indices of nodes inside the domain (row/column order of the dense
    /// assembly).
    std::vector<std::size_t> active_phase_indices() const {
        std::vector<std::size_t> idx;
        for (std::size_t i : pg_->active())
            for (std::size_t j = 0; j < pg_->n_theta(); ++j) idx.push_back(pg_->index(i, j));
        return idx;
    }

    /// Dense T K restricted to active phase nodes.
    Eigen::MatrixXd assemble_TK() const {
        const auto idx = active_phase_indices();
        const std::size_t n = idx.size();
        std::vector<long> pos(pg_->size(), -1);
        for (std::size_t a = 0; a < n; ++a) pos[idx[a]] = static_cast<long>(a);
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(static_cast<long>(n), static_cast<long>(n));
        for (std::size_t a = 0; a < n; ++a) {
            const auto cols = T_.row_cols(idx[a]);
            const auto vals = T_.row_values(idx[a]);
            for (std::size_t k = 0; k < cols.size(); ++k)
                if (pos[cols[k]] >= 0) T(static_cast<long>(a), pos[cols[k]]) += vals[k];
        }
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(static_cast<long>(n), static_cast<long>(n));
        const std::size_t nt = pg_->n_theta();
        for (std::size_t a = 0; a < n; ++a) {
            const std::size_t i = idx[a] / nt, j = idx[a] % nt;
            for (std::size_t jp = 0; jp < nt; ++jp) K(static_cast<long>(a), pos[pg_->index(i, jp)]) = K_.entry(i, j, jp);
        }
        return T * K;
    }

    /// Solves (I - T K) u = T Pi f by dense LU on the assembled matrix.
    PhaseFunction dense_solve(const PhaseFunction& source) const {
        check(source);
        const auto idx = active_phase_indices();
        const PhaseFunction u0 = apply_T1_inverse(source);
        Eigen::VectorXd b(static_cast<long>(idx.size()));
        for (std::size_t a = 0; a < idx.size(); ++a) b(static_cast<long>(a)) = u0.values[idx[a]];
        const Eigen::MatrixXd M = assemble_TK();
        const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(M.rows(), M.cols()) - M;
        const Eigen::VectorXd x = A.partialPivLu().solve(b);
        PhaseFunction u(*pg_);
        for (std::size_t a = 0; a < idx.size(); ++a) u.values[idx[a]] = x(static_cast<long>(a));
        return u;
    }

    /// Largest |eigenvalue| of the assembled T K.
    double spectral_radius() const {
        const Eigen::MatrixXd M = assemble_TK();
        if (M.rows() == 0) return 0.0;
        Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
        return es.eigenvalues().cwiseAbs().maxCoeff();
    }

    /// Power-iteration estimate of the spectral radius of T K (matrix free;
    /// valid when the dominant eigenvalue is real and simple, as for
    /// nonnegative kernels).
    double spectral_radius_power(std::size_t iters = 200, double tol = 1e-8) const {
        if (K_.is_zero()) return 0.0;
        std::vector<double> v(pg_->size(), 0.0), kv, w(pg_->size());
        for (std::size_t i : pg_->active())
            for (std::size_t j = 0; j < pg_->n_theta(); ++j) v[pg_->index(i, j)] = 1.0;
        double lambda = 0.0;
        for (std::size_t it = 0; it < iters; ++it) {
            const double nv = phase_norm(*pg_, v);
            if (nv == 0.0) return 0.0;
            for (double& x : v) x /= nv;
            K_.apply(v, kv);
            T_.apply(kv, w);
            const double next = phase_norm(*pg_, w);
            v.swap(w);
            if (it > 0 && std::abs(next - lambda) <= tol * next) return next;
            lambda = next;
        }
        return lambda;
    }

  private:
    void check(const PhaseFunction& q) const {
        if (q.grid != pg_ && !(q.grid && *q.grid == *pg_)) throw ArgumentError("transport: phase grid mismatch");
        if (q.values.size() != pg_->size()) throw ArgumentError("transport: phase function size mismatch");
    }

    const Geometry* geo_;
    const PhaseGrid* pg_;
    AttenuationField sigma_;
    ScatteringOperator K_;
    SparseMatrix T_;
};

inline TransportSolution solve_transport(const TransportOperator& op, const SourceImage& f,
                                         const TransportOptions& opts = {}) {
    return op.solve(f, opts);
}

}  // namespace curvtomo
