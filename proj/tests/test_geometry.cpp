#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "curvtomo/geometry/boundary_nodes.hpp"
#include "curvtomo/geometry/diagnostics.hpp"
#include "curvtomo/geometry/flow_jacobian.hpp"
#include "curvtomo/geometry/santalo.hpp"
#include "curvtomo/geometry/trajectory.hpp"

using namespace curvtomo;

namespace {

Domain2 unit_disc() { return Domain2::ball(Vec2{}, 1.0); }

ForceField2 bump_and_field() {
    return ForceField2::gaussian_bump(0.3, 1.0).plus(ForceField2::constant_magnetic(0.2));
}

Domain2 ellipse(double a, double b) {
    return Domain2::level_set(
        [a, b](const Vec2& x) { return 0.5 * (x[0] * x[0] / (a * a) + x[1] * x[1] / (b * b) - 1.0); },
        [a, b](const Vec2& x) { return Vec2{{x[0] / (a * a), x[1] / (b * b)}}; }, Vec2{}, std::max(a, b) * 1.01);
}

}  // namespace

TEST(Rhs, FreeMotion) {
    const auto d = rhs(PhaseState2{Vec2{{0, 0}}, Vec2{{1, 0}}}, ForceField2::zero());
    EXPECT_EQ(d.velocity, (Vec2{{1, 0}}));
    EXPECT_EQ(d.acceleration, (Vec2{{0, 0}}));
}

TEST(Rhs, HarmonicPotentialGradient) {
    const auto d = rhs(PhaseState2{Vec2{{1, 0}}, Vec2{{0, 1}}}, ForceField2::harmonic(0.5));
    EXPECT_DOUBLE_EQ(d.acceleration[0], -1.0);
    EXPECT_DOUBLE_EQ(d.acceleration[1], 0.0);
}

TEST(Rhs, MagneticMatrixProduct) {
    const auto d = rhs(PhaseState2{Vec2{}, Vec2{{1, 0}}}, ForceField2::constant_magnetic(2.0));
    EXPECT_DOUBLE_EQ(d.acceleration[0], 0.0);
    EXPECT_DOUBLE_EQ(d.acceleration[1], -2.0);
}

TEST(ForceField, MagneticPartIsSkewAndDoesNoWork) {
    const auto f = ForceField2::radial_magnetic(0.7, 0.5).plus(ForceField2::constant_magnetic(-0.3));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int k = 0; k < 100; ++k) {
        const Vec2 x{{u(rng), u(rng)}}, th{{u(rng), u(rng)}};
        EXPECT_EQ(f.skew_defect(x), 0.0);
        EXPECT_NEAR(dot(th, f.magnetic(x) * th), 0.0, 1e-15);
    }
}

TEST(Domain, LevelSetSignConventionAndEnclosure) {
    const auto e = ellipse(1.0, 0.6);
    EXPECT_EQ(e.check_level_set(), "");
    const auto inner = Domain2::ball(Vec2{}, 0.5).with_enclosing(e);
    EXPECT_EQ(&inner.outermost(), inner.enclosing());
    EXPECT_THROW(Domain2::ball(Vec2{}, 0.7).with_enclosing(e), DomainError);
    EXPECT_NEAR(e.boundary_radius(0.5 * kPi), 0.6, 1e-12);
}

TEST(EnergyShell, RejectsLevelBelowPotentialMaximum) {
    const auto d = unit_disc();
    EXPECT_THROW(EnergyShell2(0.9, ForceField2::harmonic(1.0), d), DomainError);
    EnergyShell2 s(1.2, ForceField2::harmonic(1.0), d);
    EXPECT_NEAR(s.speed(Vec2{{0.5, 0}}), std::sqrt(2.0 * (1.2 - 0.25)), 1e-15);
    EXPECT_GT(s.min_speed(), 0.0);
}

TEST(PhaseState, ShellValidation) {
    const auto d = unit_disc();
    EnergyShell2 s(0.5, ForceField2::zero(), d);
    const auto ok = on_shell(Vec2{}, Vec2{{1.0 + 5e-7, 0}}, s);
    EXPECT_NEAR(norm(ok.theta), 1.0, 1e-15);
    EXPECT_THROW(on_shell(Vec2{}, Vec2{{1.01, 0}}, s), DomainError);
}

TEST(Trajectory, UnitSpeedChordOfUnitDisc) {
    const auto d = unit_disc();
    EnergyShell2 s(0.5, ForceField2::zero(), d);
    const auto tr = shoot_trajectory(PhaseState2{Vec2{}, Vec2{{1, 0}}}, Direction::both, d, s);
    EXPECT_EQ(tr.status, TrajectoryStatus::exited);
    EXPECT_NEAR(tr.ell_plus, 1.0, 1e-12);
    EXPECT_NEAR(tr.ell_minus, -1.0, 1e-12);
    for (const auto& smp : tr.samples) EXPECT_NEAR(smp.x[1], 0.0, 1e-15);
    EXPECT_NEAR(d.level(tr.exit_plus.x), 0.0, 2e-10);
}

TEST(Trajectory, MagneticCircleMatchesClosedForm) {
    const double b = 0.8;
    const auto d = unit_disc();
    EnergyShell2 s(0.5, ForceField2::constant_magnetic(b), d);
    const auto tr = shoot_trajectory(PhaseState2{Vec2{}, Vec2{{1, 0}}}, Direction::both, d, s);
    double err = 0.0;
    for (const auto& smp : tr.samples) {
        const Vec2 exact{{std::sin(b * smp.s) / b, (std::cos(b * smp.s) - 1.0) / b}};
        err = std::max(err, norm(smp.x - exact));
    }
    EXPECT_LT(err, 1e-11);
    // chord from the centre to the unit circle along a circle of radius 1/b
    const double expect = 2.0 / b * std::asin(b / 2.0);
    EXPECT_NEAR(tr.ell_plus, expect, 1e-10);
}

TEST(Trajectory, HarmonicTrapIsReportedTrapped) {
    const auto d = unit_disc();
    EnergyShell2 s(1.01, ForceField2::harmonic(1.0), d);
    const double r0 = 0.9;
    // tangential start: turning radii solve r^4 - tau r^2 + L^2/2 = 0, largest is r0 < 1
    const auto st = shell_state(Vec2{{r0, 0}}, 0.5 * kPi, s);
    for (double budget : {5.0, 50.0, 0.0}) {
        IntegratorOptions o;
        o.budget = budget;
        o.keep_samples = false;
        const auto tr = shoot_trajectory(st, Direction::forward, d, s, o);
        EXPECT_EQ(tr.status, TrajectoryStatus::trapped) << budget;
    }
}

TEST(Trajectory, RejectsNonPositiveStep) {
    const auto d = unit_disc();
    EnergyShell2 s(0.5, ForceField2::zero(), d);
    IntegratorOptions o;
    o.step = -1.0;
    EXPECT_THROW(shoot_trajectory(PhaseState2{Vec2{}, Vec2{{1, 0}}}, Direction::both, d, s, o), ArgumentError);
}

TEST(Trajectory, OutgoingBoundaryStartExitsImmediately) {
    const auto d = unit_disc();
    EnergyShell2 s(0.5, ForceField2::zero(), d);
    const auto tr = shoot_trajectory(PhaseState2{Vec2{{1, 0}}, Vec2{{0.6, 0.8}}}, Direction::forward, d, s);
    EXPECT_EQ(tr.ell_plus, 0.0);
    const auto back = shoot_trajectory(PhaseState2{Vec2{{1, 0}}, Vec2{{0.6, 0.8}}}, Direction::backward, d, s);
    EXPECT_NEAR(back.ell_minus, -1.2, 1e-10);
}

TEST(Trajectory, TimeReversalWithFlippedVelocity) {
    const auto d = unit_disc();
    for (bool magnetic : {false, true}) {
        const auto f = magnetic ? bump_and_field() : ForceField2::gaussian_bump(0.3, 1.0);
        EnergyShell2 s(1.0, f, d);
        EnergyShell2 rev(1.0, f.with_reversed_magnetic(), d);
        const auto st = shell_state(Vec2{{0.2, -0.3}}, 1.1, s);
        const auto tr = shoot_trajectory(st, Direction::forward, d, s);
        const std::size_t n = static_cast<std::size_t>(std::ceil(tr.ell_plus / 2e-3));
        const auto back = sample_uniform(PhaseState2{tr.exit_plus.x, -tr.exit_plus.theta}, tr.ell_plus, n, rev.force());
        EXPECT_LT(norm(back.back().x - st.x), 10 * 2e-10) << magnetic;
        EXPECT_LT(norm(back.back().theta + st.theta), 10 * 2e-10) << magnetic;
    }
}

TEST(Trajectory, FlowSemigroup) {
    const auto f = bump_and_field();
    const PhaseState2 st{Vec2{{0.1, 0.1}}, Vec2{{0.9, 0.7}}};
    const auto direct = sample_uniform(st, 0.8, 400, f).back();
    const auto mid = sample_uniform(st, 0.3, 150, f).back();
    const auto split = sample_uniform(mid, 0.5, 250, f).back();
    EXPECT_LT(norm(direct.x - split.x), 1e-12);
    EXPECT_LT(norm(direct.theta - split.theta), 1e-12);
}

TEST(Trajectory, EnergyDriftConvergesAtFourthOrder) {
    const auto d = unit_disc();
    EnergyShell2 s(1.0, bump_and_field(), d);
    const auto r = energy_drift_sweep(d, s, 50, 4e-3, 11);
    EXPECT_LT(r.max_drift, 1e-11);
    EXPECT_GT(r.ratio, 10.0);
}

TEST(Convexity, EuclideanDiscPasses) {
    const auto d = unit_disc();
    EnergyShell2 s(0.5, ForceField2::zero(), d);
    EXPECT_TRUE(check_strict_convexity(d, s, 64, 8).passed());
}

TEST(Convexity, WeakMagneticPassesStrongFails) {
    const auto d = unit_disc();
    EnergyShell2 weak(0.5, ForceField2::constant_magnetic(0.2), d);
    EXPECT_TRUE(check_strict_convexity(d, weak, 64, 8).passed());
    // p = 1, b = 2: trajectory radius 1/2 < 1, tangential circles re-enter
    EnergyShell2 strong(0.5, ForceField2::constant_magnetic(2.0), d);
    const auto rep = check_strict_convexity(d, strong, 64, 8);
    EXPECT_FALSE(rep.passed());
    EXPECT_EQ(rep.violations.size(), 64u * 2);
}

TEST(Nontrapping, ChordsOfUnitDisc) {
    const auto d = unit_disc();
    EnergyShell2 s(0.5, ForceField2::zero(), d);
    const auto rep = check_nontrapping(d, s, 300, 100.0, 4);
    EXPECT_TRUE(rep.passed());
    EXPECT_LE(rep.max_travel, 2.0 + 1e-9);
}

TEST(Nontrapping, WeakMagneticArcBound) {
    const double b = 0.2;
    const auto d = unit_disc();
    EnergyShell2 s(0.5, ForceField2::constant_magnetic(b), d);
    const auto rep = check_nontrapping(d, s, 300, 100.0, 4);
    EXPECT_TRUE(rep.passed());
    EXPECT_LE(rep.max_travel, 2.0 * std::asin(b) / b + 1e-9);
}

TEST(BoundaryMeasure, TotalOnUnitDisc) {
    const auto d = unit_disc();
    EnergyShell2 s(0.5, ForceField2::zero(), d);
    const auto nodes = boundary_measure_nodes(d, s, 64, 32);
    double total = 0.0;
    for (const auto& n : nodes) {
        EXPECT_GE(n.weight, 0.0);
        EXPECT_GT(dot(n.normal, n.theta), 0.0);
        total += n.weight;
    }
    EXPECT_NEAR(total / (4.0 * kPi), 1.0, 1e-3);
}

TEST(BoundaryMeasure, ConstantSpeedScalesQuadratically) {
    const auto d = unit_disc();
    const double c = 1.7;
    EnergyShell2 s(0.5 * c * c, ForceField2::zero(), d);
    double total = 0.0;
    for (const auto& n : boundary_measure_nodes(d, s, 64, 32)) total += n.weight;
    EXPECT_NEAR(total / (4.0 * kPi * c * c), 1.0, 1e-3);
}

TEST(BoundaryMeasure, TangentialNodesHaveZeroWeight) {
    const auto d = unit_disc();
    EnergyShell2 s(0.5, ForceField2::zero(), d);
    BoundaryNodeOptions o;
    o.angular_rule = AngularRule::trapezoid;
    const auto nodes = boundary_measure_nodes(d, s, 8, 9, o);
    for (const auto& n : nodes)
        if (n.direction_index == 0 || n.direction_index == 8) {
            EXPECT_EQ(n.weight, 0.0);
        }
}

TEST(BoundaryMeasure, EllipseTotalMatchesPerimeter) {
    const auto e = ellipse(1.0, 0.6);
    EnergyShell2 s(0.5, ForceField2::zero(), e);
    double total = 0.0;
    for (const auto& n : boundary_measure_nodes(e, s, 128, 32)) total += n.weight;
    EXPECT_NEAR(total / (2.0 * e.perimeter()), 1.0, 1e-3);
}

TEST(Santalo, ConstantFunctionFreeMotion) {
    const auto d = unit_disc();
    EnergyShell2 s(0.5, ForceField2::zero(), d);
    SantaloOptions o;
    o.n_boundary = 64;
    o.n_angle = 48;
    o.n_ray = 32;
    const auto r = santalo_check([](const Vec2&, const Vec2&) { return 1.0; }, d, s, o);
    EXPECT_NEAR(r.lhs, 2.0 * kPi * kPi, 1e-10);
    EXPECT_LT(r.rel_err, 1e-6);
}

TEST(Santalo, OddFunctionVanishes) {
    const auto d = unit_disc();
    EnergyShell2 s(0.5, ForceField2::zero(), d);
    SantaloOptions o;
    o.n_boundary = 64;
    o.n_angle = 48;
    o.n_ray = 32;
    const auto r = santalo_check([](const Vec2&, const Vec2& th) { return th[0]; }, d, s, o);
    EXPECT_NEAR(r.lhs, 0.0, 1e-12);
    EXPECT_NEAR(r.rhs, 0.0, 1e-8);
}

TEST(Santalo, HarmonicPotentialGaussian) {
    const auto d = unit_disc();
    // tau > 2 kappa keeps the disc strictly convex for the flow
    EnergyShell2 s(1.5, ForceField2::harmonic(0.5), d);
    SantaloOptions o;
    o.n_boundary = 96;
    o.n_angle = 64;
    o.n_ray = 64;
    const auto r = santalo_check(
        [](const Vec2& x, const Vec2&) { const Vec2 c{{0.2, -0.1}}; return std::exp(-dot(x - c, x - c) / 0.2); }, d,
        s, o);
    EXPECT_LT(r.rel_err, 1e-6);
}

TEST(Santalo, EllipseWithField) {
    const auto e = ellipse(1.0, 0.7);
    EnergyShell2 s(1.0, bump_and_field(), e);
    SantaloOptions o;
    o.n_boundary = 128;
    o.n_angle = 64;
    o.n_ray = 64;
    const auto r = santalo_check([](const Vec2& x, const Vec2&) { return 1.0 + x[0]; }, e, s, o);
    EXPECT_LT(r.rel_err, 1e-5);
}

TEST(FlowJacobian, IdentityForFreeMotion) {
    const auto d = unit_disc();
    EnergyShell2 s(0.5, ForceField2::zero(), d);
    const auto j = boundary_jacobian_variational(Vec2{{0.3, -0.2}}, 0.7, d, s);
    EXPECT_NEAR(j.jb, 1.0, 1e-10);
}

TEST(FlowJacobian, VariationalMatchesFiniteDifferenceAndSpeedRatio) {
    const auto d = unit_disc();
    EnergyShell2 s(1.0, bump_and_field(), d);
    for (double beta : {0.3, 2.0, 4.0}) {
        const Vec2 x{{0.4 * std::cos(beta * 3), 0.3 * std::sin(beta)}};
        const auto v = boundary_jacobian_variational(x, beta, d, s);
        const auto f = boundary_jacobian_fd(x, beta, d, s);
        EXPECT_NEAR(v.jb, f.jb, 1e-7);
        EXPECT_NEAR(v.jb, s.speed(v.exit.x) / s.speed(x), 1e-9);
    }
}
