#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "curvtomo/core/grid.hpp"
#include "curvtomo/core/parallel.hpp"
#include "curvtomo/core/quadrature.hpp"
#include "curvtomo/core/sparse.hpp"
#include "curvtomo/geometry/bicubic_field.hpp"

using namespace curvtomo;

TEST(Quadrature, GaussLegendreIntegratesPolynomialsExactly) {
    const auto q = gauss_legendre(5, -1.0, 2.0);
    double s = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) s += q.weights[i] * std::pow(q.nodes[i], 9);
    EXPECT_NEAR(s, (std::pow(2.0, 10) - 1.0) / 10.0, 1e-11);
}

TEST(Quadrature, SimpsonIsFourthOrder) {
    auto err = [](std::size_t n) {
        const double h = 1.0 / static_cast<double>(n);
        const auto w = simpson_weights(n, h);
        double s = 0.0;
        for (std::size_t i = 0; i <= n; ++i) s += w[i] * std::exp(h * static_cast<double>(i));
        return std::abs(s - (std::exp(1.0) - 1.0));
    };
    EXPECT_GT(err(8) / err(16), 15.0);
    EXPECT_THROW(simpson_weights(3, 0.1), ArgumentError);
}

TEST(Quadrature, TrapezoidAndMidpointWeightsSumToLength) {
    const auto t = trapezoid_rule(7, 0.0, 3.0);
    const auto m = midpoint_rule(7, 0.0, 3.0);
    EXPECT_NEAR(std::accumulate(t.weights.begin(), t.weights.end(), 0.0), 3.0, 1e-14);
    EXPECT_NEAR(std::accumulate(m.weights.begin(), m.weights.end(), 0.0), 3.0, 1e-14);
}

TEST(Grid, BilinearReproducesLinearFunctions) {
    SpatialGrid g(Box{-1, 1, -1, 1}, 10, 12);
    std::vector<double> v(g.size());
    for (std::size_t j = 0; j < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const Vec2 c = g.center(i, j);
            v[g.index(i, j)] = 2.0 * c[0] - 3.0 * c[1] + 0.5;
        }
    const Vec2 x{{0.123, -0.377}};
    EXPECT_NEAR(g.interpolate(v, x), 2.0 * x[0] - 3.0 * x[1] + 0.5, 1e-13);
}

TEST(Grid, OutsideNodesAreZeroPadded) {
    SpatialGrid g(Box{0, 1, 0, 1}, 4, 4);
    std::vector<double> ones(g.size(), 1.0);
    EXPECT_NEAR(g.interpolate(ones, Vec2{{0.5, 0.5}}), 1.0, 1e-15);
    EXPECT_LT(g.interpolate(ones, Vec2{{0.01, 0.5}}), 1.0);
    EXPECT_EQ(g.interpolate(ones, Vec2{{5.0, 5.0}}), 0.0);
}

TEST(Sparse, TransposeMatchesDenseAndIsThreadIndependent) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    const std::size_t rows = 300, cols = 77;
    std::vector<std::vector<double>> dense(rows, std::vector<double>(cols, 0.0));
    auto m = build_sparse_rows(rows, cols, [&](std::size_t r, RowAccumulator& acc) {
        std::mt19937_64 local(r);
        for (int k = 0; k < 5; ++k) {
            const auto c = static_cast<std::uint32_t>(local() % cols);
            const double v = std::uniform_real_distribution<double>(-1, 1)(local);
            acc.add(c, v);
        }
    });
    for (std::size_t r = 0; r < rows; ++r) {
        const auto cs = m.row_cols(r);
        const auto vs = m.row_values(r);
        for (std::size_t k = 0; k < cs.size(); ++k) dense[r][cs[k]] += vs[k];
    }
    std::vector<double> x(rows);
    for (auto& v : x) v = u(rng);
    std::vector<double> y1(cols), y2(cols);
    set_thread_count(1);
    m.apply_transpose(x, y1);
    set_thread_count(3);
    m.apply_transpose(x, y2);
    set_thread_count(0);
    for (std::size_t c = 0; c < cols; ++c) {
        double ref = 0.0;
        for (std::size_t r = 0; r < rows; ++r) ref += dense[r][c] * x[r];
        EXPECT_NEAR(y1[c], ref, 1e-12);
        EXPECT_EQ(y1[c], y2[c]);
    }
}

TEST(Parallel, ExceptionsPropagate) {
    EXPECT_THROW(parallel_for(100, [](std::size_t i) { if (i == 37) throw ArgumentError("boom"); }), ArgumentError);
}

TEST(BicubicField, ReproducesSmoothFunctionAndGradient) {
    SpatialGrid g(Box{-1.2, 1.2, -1.2, 1.2}, 64, 64);
    GridImage img(g);
    auto f = [](const Vec2& x) { return std::exp(-dot(x, x)) * std::cos(x[0]); };
    for (std::size_t j = 0; j < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i) img(i, j) = f(g.center(i, j));
    BicubicField b(img);
    const Vec2 x{{0.31, -0.47}};
    EXPECT_NEAR(b(x), f(x), 1e-5);
    const double gx = (f(x + Vec2{{1e-6, 0}}) - f(x - Vec2{{1e-6, 0}})) / 2e-6;
    EXPECT_NEAR(b.derivative_field(0)(x), gx, 1e-4);
    EXPECT_THROW(b(Vec2{{2.0, 0.0}}), DomainError);
}
