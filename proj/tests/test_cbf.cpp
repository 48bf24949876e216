#include "safetune/cbf.hpp"

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include <numbers>

namespace safetune {
namespace {

constexpr double pi = std::numbers::pi;

TEST(Barrier, HandValues)
{
    const Obstacle o{{1.0, 0.0}, 0.3};
    EXPECT_NEAR(barrier({0, 0, 0}, o, 0.2), 0.5, 1e-15);
    EXPECT_NEAR(barrier({0, 0, pi}, o, 0.2), 0.9, 1e-15);
}

TEST(Barrier, InvariantUnderRotationAboutOrigin)
{
    Rng rng = make_stream(1);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int t = 0; t < 200; ++t) {
        const UnicycleState s{u(rng), u(rng), u(rng)};
        const Obstacle o{{u(rng) + 5.0, u(rng)}, 0.4};
        const double a = u(rng) * pi;
        const Eigen::Matrix2d R = Eigen::Rotation2Dd(a).toRotationMatrix();
        const Eigen::Vector2d p = R * s.position();
        const UnicycleState sr{p.x(), p.y(), s.psi + a};
        const Obstacle orot{R * o.center, o.radius};
        EXPECT_NEAR(barrier(s, o, 0.2), barrier(sr, orot, 0.2), 1e-12);
    }
}

TEST(Barrier, RejectsRobotAtObstacleCenter)
{
    EXPECT_THROW(barrier({1.0, 2.0, 0.0}, {{1.0, 2.0}, 0.5}, 0.2), GeometryError);
    EXPECT_THROW(lie_derivatives({1.0, 2.0, 0.0}, {{1.0, 2.0}, 0.5}, 0.2), GeometryError);
}

TEST(LieDerivatives, DriftTermIsZeroAndHeadOnTurnRateVanishes)
{
    const auto ld = lie_derivatives({0, 0, 0}, {{1.0, 0.0}, 0.3}, 0.2);
    EXPECT_EQ(ld.lf, 0.0);
    EXPECT_NEAR(ld.lg.y(), 0.0, 1e-15);
    EXPECT_NEAR(ld.lg.x(), -1.0, 1e-15);
}

// dh/dt along the flow with input u equals Lg h . u; check against a central
// difference of h along a short straight-line motion.
TEST(LieDerivatives, MatchFiniteDifferencesAlongTheFlow)
{
    Rng rng = make_stream(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double eps = 1e-6;
    for (int t = 0; t < 1000; ++t) {
        const UnicycleState s{2.0 * u(rng), 2.0 * u(rng), pi * u(rng)};
        Obstacle o{{3.0 + u(rng), 3.0 * u(rng)}, 0.5};
        const double zeta = 0.1 + 0.2 * (u(rng) + 1.0);
        const auto ld = lie_derivatives(s, o, zeta);
        const Eigen::Vector2d in(u(rng), u(rng));
        auto moved = [&](double dt) {
            return UnicycleState{s.x + dt * std::cos(s.psi) * in.x(), s.y + dt * std::sin(s.psi) * in.x(),
                                 s.psi + dt * in.y()};
        };
        const double fd = (barrier(moved(eps), o, zeta) - barrier(moved(-eps), o, zeta)) / (2.0 * eps);
        EXPECT_NEAR(ld.lf + ld.lg.dot(in), fd, 1e-6) << "trial " << t;
    }
}

TEST(NominalController, HandValues)
{
    const auto k = nominal_controller({0, 0, 0}, {1.0, 0.0});
    EXPECT_NEAR(k.v, 0.6, 1e-15);
    EXPECT_NEAR(k.omega, 0.0, 1e-15);
    const auto at_goal = nominal_controller({1.0, 2.0, 0.3}, {1.0, 2.0});
    EXPECT_EQ(at_goal.v, 0.0);
    EXPECT_EQ(at_goal.omega, 0.0);
    // Facing the goal bearing turns nothing.
    const double bearing = 0.7;
    const auto k2 = nominal_controller({0, 0, bearing}, {2.0 * std::cos(bearing), 2.0 * std::sin(bearing)});
    EXPECT_NEAR(k2.omega, 0.0, 1e-12);
    const auto k3 = nominal_controller({0, 0, 0}, {0.0, 2.0}, {0.5, 2.0, 0.1});
    EXPECT_NEAR(k3.v, 1.1, 1e-15);
    EXPECT_NEAR(k3.omega, 2.0, 1e-15);
}

TEST(WrapAngle, HalfOpenInterval)
{
    EXPECT_DOUBLE_EQ(wrap_angle(pi), pi);
    EXPECT_DOUBLE_EQ(wrap_angle(-pi), pi);
    EXPECT_NEAR(wrap_angle(3 * pi + 0.1), -pi + 0.1, 1e-12);
    EXPECT_NEAR(wrap_angle(0.25), 0.25, 1e-15);
}

TEST(RobustParams, Validation)
{
    EXPECT_THROW(RobustParams::from_values({0.0, 0.1, 0.1, 0.0}), std::invalid_argument);
    EXPECT_THROW(RobustParams::from_values({1.0, -0.1, 0.1, 0.0}), std::invalid_argument);
    EXPECT_THROW(RobustParams::from_values({1.0, 0.1, 0.1}), std::invalid_argument);
    const auto p = RobustParams::from_values({3, 0.6, 0.5, 0.015});
    EXPECT_EQ(p.alpha, 3.0);
    EXPECT_EQ(p.b, 0.015);
}

TEST(IssfBound, Values)
{
    const RobustParams p{3.0, 0.6, 0.5, 0.015};
    EXPECT_EQ(issf_bound(0.0, p), 0.0);
    EXPECT_NEAR(issf_bound(1.0, p), 1.0 / 7.2, 1e-15);
    EXPECT_NEAR(issf_bound(0.5, p), issf_bound(1.0, p) / 4.0, 1e-15);
    EXPECT_THROW(issf_bound(1.0, {3.0, 0.0, 0.5, 0.0}), std::domain_error);
}

TEST(ConservativeBaseline, ScalesLinearlyInEpsilon)
{
    BaselineDomain dom;
    dom.samples = 20000;
    const auto L = estimate_lipschitz(dom, 0.2);
    const auto zero = conservative_baseline(0.0, L, 2.0, 0.5);
    EXPECT_EQ(zero.a, 0.0);
    EXPECT_EQ(zero.b, 0.0);
    const auto one = conservative_baseline(0.1, L, 2.0, 0.5);
    const auto two = conservative_baseline(0.2, L, 2.0, 0.5);
    EXPECT_GT(one.a, 0.0);
    EXPECT_GT(one.b, 0.0);
    EXPECT_NEAR(two.a, 2.0 * one.a, 1e-15);
    EXPECT_NEAR(two.b, 2.0 * one.b, 1e-15);
    EXPECT_THROW(conservative_baseline(-1.0, L, 2.0, 0.5), std::invalid_argument);
}

TEST(ConservativeBaseline, EstimateGrowsWithSampleCount)
{
    BaselineDomain dom;
    dom.seed = 31;
    LipschitzEstimate prev{};
    for (std::size_t n : {100u, 1000u, 10000u, 100000u}) {
        dom.samples = n;
        const auto L = estimate_lipschitz(dom, 0.2);
        EXPECT_GE(L.h, prev.h);
        EXPECT_GE(L.lg_h, prev.lg_h);
        EXPECT_GE(L.lg_h_sq_norm, prev.lg_h_sq_norm);
        EXPECT_EQ(L.lf_h, 0.0);
        EXPECT_EQ(L.samples, n);
        prev = L;
    }
    // |grad_rho h| <= 1 + zeta/d_min with d_min = 0.5.
    EXPECT_LE(prev.h, 1.0 + 0.2 / 0.5 + 1e-9);
    EXPECT_GT(prev.h, 0.9);
}

TEST(InputBox, ClampAndContains)
{
    const InputBox box;
    const auto c = box.clamp({1.0, -1.0});
    EXPECT_EQ(c.v, 0.3);
    EXPECT_EQ(c.omega, -0.4);
    EXPECT_TRUE(box.contains(c));
    EXPECT_FALSE(box.contains({0.31, 0.0}));
    for (const auto& h : box.constraints()) EXPECT_GE(h.residual(Eigen::Vector2d(0.0, 0.0)), 0.0);
}

}  // namespace
}  // namespace safetune
