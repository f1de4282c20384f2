#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "curvtomo/core/errors.hpp"
#include "curvtomo/recon/model.hpp"

namespace curvtomo {

struct ReconstructionResult {
    SourceImage f_hat;
    /// CGNE: sqrt(||d - A f||^2 + eps ||f||^2) per iterate (starting with f = 0).
    /// Landweber: ||d - A f|| per iterate.
    std::vector<double> residual_history;
    /// ||P A* (d - A f) - eps f|| per iterate.
    std::vector<double> normal_residual_history;
    std::size_t iterations = 0;
    bool converged = false;
    bool diverged = false;
    double rel_data_residual = 0.0;
};

struct CgneOptions {
    std::size_t max_iter = 200;
    /// Relative normal-equation residual.
    double tol = 1e-8;
};

struct LandweberOptions {
    /// Unset selects 1 / ||A||^2 from power iteration.
    std::optional<double> step;
    std::size_t max_iter = 500;
    double tol = 1e-8;
    /// Reported as diverged when the data residual exceeds this multiple of
    /// its initial value.
    double blowup = 1e6;
};

namespace detail {

inline void check_finite(const std::vector<double>& v, const char* solver, std::size_t it) {
    for (double x : v)
        if (!std::isfinite(x)) throw NumericalError(std::string(solver) + ": non-finite value at iteration " + std::to_string(it));
}

inline ReconstructionResult finish(const InverseProblemSetup& s, std::vector<double> f, const std::vector<double>& data) {
    ReconstructionResult r;
    s.apply_mask(f);
    const auto Af = s.model->forward(f);
    std::vector<double> res(data.size());
    for (std::size_t q = 0; q < res.size(); ++q) res[q] = data[q] - Af[q];
    const double nd = s.model->data_norm(data);
    r.rel_data_residual = nd > 0.0 ? s.model->data_norm(res) / nd : 0.0;
    r.f_hat = SourceImage(GridImage(s.grid(), std::move(f)), s.support);
    return r;
}

}  // namespace detail

/// Conjugate gradients on the normal equations (P A* A P + eps) f = P A* d,
/// in the CGLS arrangement: the augmented residual is nonincreasing.
inline ReconstructionResult reconstruct_cgne(const InverseProblemSetup& s, const std::vector<double>& data,
                                             const CgneOptions& o = {}) {
    const MeasurementModel& A = *s.model;
    if (data.size() != A.data_size()) throw ArgumentError("reconstruct_cgne: data not on the setup's node set");
    const double eps = s.epsilon;
    std::vector<double> x(A.image_size(), 0.0), r = data;
    std::vector<double> sv = s.adjoint(r);
    std::vector<double> p = sv;
    double gamma = A.image_dot(sv, sv);
    const double s0 = std::sqrt(gamma);
    std::vector<double> hist{A.data_norm(r)}, nhist{s0};
    std::size_t it = 0;
    bool converged = s0 == 0.0;
    while (!converged && it < o.max_iter) {
        const auto q = s.forward(p);
        const double delta = A.data_dot(q, q) + eps * A.image_dot(p, p);
        if (!(delta > 0.0)) break;
        const double alpha = gamma / delta;
        for (std::size_t k = 0; k < x.size(); ++k) x[k] += alpha * p[k];
        for (std::size_t k = 0; k < r.size(); ++k) r[k] -= alpha * q[k];
        ++it;
        detail::check_finite(x, "reconstruct_cgne", it);
        sv = s.adjoint(r);
        if (eps > 0.0)
            for (std::size_t k = 0; k < sv.size(); ++k) sv[k] -= s.mask[k] ? eps * x[k] : 0.0;
        const double gnew = A.image_dot(sv, sv);
        hist.push_back(std::sqrt(A.data_dot(r, r) + eps * A.image_dot(x, x)));
        nhist.push_back(std::sqrt(gnew));
        if (std::sqrt(gnew) <= o.tol * s0) {
            converged = true;
            break;
        }
        const double beta = gnew / gamma;
        gamma = gnew;
        for (std::size_t k = 0; k < p.size(); ++k) p[k] = sv[k] + beta * p[k];
    }
    auto res = detail::finish(s, std::move(x), data);
    res.residual_history = std::move(hist);
    res.normal_residual_history = std::move(nhist);
    res.iterations = it;
    res.converged = converged;
    return res;
}

struct PowerIterationResult {
    /// Estimate of ||A P||^2, the largest eigenvalue of P A* A P.
    double norm_sq = 0.0;
    std::size_t iterations = 0;
};

inline PowerIterationResult power_iteration(const InverseProblemSetup& s, std::size_t max_iter = 100, double tol = 1e-6,
                                            unsigned seed = 1) {
    const MeasurementModel& A = *s.model;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<double> v(A.image_size());
    for (double& x : v) x = g(rng);
    s.apply_mask(v);
    PowerIterationResult out;
    double lambda = 0.0;
    for (std::size_t it = 0; it < max_iter; ++it) {
        const double nv = A.image_norm(v);
        if (nv == 0.0) break;
        for (double& x : v) x /= nv;
        auto w = s.adjoint(s.forward(v));
        const double next = A.image_dot(v, w);
        out.iterations = it + 1;
        v.swap(w);
        if (it > 0 && std::abs(next - lambda) <= tol * next) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    out.norm_sq = lambda;
    return out;
}

/// Landweber iteration f <- f + step (P A* (d - A f) - eps f).
inline ReconstructionResult reconstruct_landweber(const InverseProblemSetup& s, const std::vector<double>& data,
                                                  const LandweberOptions& o = {},
                                                  const std::vector<double>& f0 = {}) {
    const MeasurementModel& A = *s.model;
    if (data.size() != A.data_size()) throw ArgumentError("reconstruct_landweber: data not on the setup's node set");
    const double step = o.step ? *o.step : 1.0 / power_iteration(s).norm_sq;
    std::vector<double> f = f0.empty() ? std::vector<double>(A.image_size(), 0.0) : f0;
    if (f.size() != A.image_size()) throw ArgumentError("reconstruct_landweber: initial image has the wrong size");
    s.apply_mask(f);
    ReconstructionResult out;
    std::vector<double> r(data.size());
    auto residual = [&]() {
        const auto Af = s.forward(f);
        for (std::size_t q = 0; q < r.size(); ++q) r[q] = data[q] - Af[q];
        return A.data_norm(r);
    };
    const double r0 = residual();
    out.residual_history.push_back(r0);
    double n0 = -1.0;
    std::size_t it = 0;
    const std::size_t max_iter = step == 0.0 ? 0 : o.max_iter;
    for (; it < max_iter; ++it) {
        auto gr = s.adjoint(r);
        if (s.epsilon > 0.0)
            for (std::size_t k = 0; k < gr.size(); ++k) gr[k] -= s.mask[k] ? s.epsilon * f[k] : 0.0;
        const double ng = A.image_norm(gr);
        out.normal_residual_history.push_back(ng);
        if (n0 < 0.0) n0 = ng;
        if (ng <= o.tol * n0 || ng == 0.0) {
            out.converged = true;
            break;
        }
        for (std::size_t k = 0; k < f.size(); ++k) f[k] += step * gr[k];
        const double rn = residual();
        out.residual_history.push_back(rn);
        if (!std::isfinite(rn) || rn > o.blowup * std::max(r0, 1e-300)) {
            out.diverged = true;
            ++it;
            break;
        }
    }
    if (out.diverged) {
        out.iterations = it;
        out.f_hat = SourceImage(GridImage(s.grid(), f), s.support);
        out.rel_data_residual = std::numeric_limits<double>::infinity();
        return out;
    }
    auto fin = detail::finish(s, std::move(f), data);
    fin.residual_history = std::move(out.residual_history);
    fin.normal_residual_history = std::move(out.normal_residual_history);
    fin.iterations = it;
    fin.converged = out.converged;
    return fin;
}

/// Dense matrix of the masked operator in orthonormal coordinates:
/// column k is sqrt(w) . A e_k / sqrt(cell area) for mask node k.
inline Eigen::MatrixXd assemble_dense(const InverseProblemSetup& s) {
    const MeasurementModel& A = *s.model;
    std::vector<std::size_t> cols;
    for (std::size_t k = 0; k < s.mask.size(); ++k)
        if (s.mask[k]) cols.push_back(k);
    Eigen::MatrixXd M(static_cast<long>(A.data_size()), static_cast<long>(cols.size()));
    const double ic = 1.0 / std::sqrt(A.grid().cell_area());
    std::vector<double> e(A.image_size(), 0.0);
    for (std::size_t c = 0; c < cols.size(); ++c) {
        e[cols[c]] = 1.0;
        const auto col = A.forward(e);
        e[cols[c]] = 0.0;
        for (std::size_t q = 0; q < col.size(); ++q)
            M(static_cast<long>(q), static_cast<long>(c)) = std::sqrt(A.nodes()[q].weight) * col[q] * ic;
    }
    return M;
}

struct DenseSpectrum {
    double sigma_max = 0.0;
    double sigma_min = 0.0;
    /// sigma_max^2 / sigma_min^2, the condition number of the Gram matrix.
    double gram_condition = 0.0;
};

/// Singular values of the assembled masked operator (coarse grids only).
inline DenseSpectrum dense_spectrum(const InverseProblemSetup& s) {
    const Eigen::MatrixXd M = assemble_dense(s);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& sv = svd.singularValues();
    DenseSpectrum d;
    if (sv.size() == 0) return d;
    d.sigma_max = sv(0);
    d.sigma_min = sv(sv.size() - 1);
    d.gram_condition = d.sigma_min > 0.0 ? (d.sigma_max * d.sigma_max) / (d.sigma_min * d.sigma_min)
                                         : std::numeric_limits<double>::infinity();
    return d;
}

}  // namespace curvtomo
