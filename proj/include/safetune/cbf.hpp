#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "safetune/action_grid.hpp"
#include "safetune/random.hpp"
#include "safetune/socp.hpp"

namespace safetune {

struct GeometryError : std::domain_error {
    using std::domain_error::domain_error;
};

struct Obstacle {
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
    double radius = 0.0;  // obstacle radius plus robot radius
};

struct UnicycleState {
    double x = 0.0;
    double y = 0.0;
    double psi = 0.0;

    Eigen::Vector2d position() const { return {x, y}; }
};

struct ControlInput {
    double v = 0.0;
    double omega = 0.0;

    Eigen::Vector2d vec() const { return {v, omega}; }
    static ControlInput from(const Eigen::Vector2d& u) { return {u.x(), u.y()}; }
};

// Wraps to (-pi, pi].
inline double wrap_angle(double a)
{
    a = std::remainder(a, 2.0 * std::numbers::pi);
    if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
    return a;
}

// The four tunable filter parameters.
struct RobustParams {
    double alpha = 1.0;
    double phi = 0.0;
    double a = 0.0;
    double b = 0.0;

    static RobustParams from_values(const std::vector<double>& v)
    {
        if (v.size() != 4) throw std::invalid_argument("robust parameters need (alpha, phi, a, b)");
        RobustParams p{v[0], v[1], v[2], v[3]};
        p.validate();
        return p;
    }

    static RobustParams from_action(const Action& act) { return from_values(act.values); }

    void validate() const
    {
        if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
        if (!(phi >= 0.0) || !(a >= 0.0) || !(b >= 0.0)) {
            throw std::invalid_argument("phi, a and b must be non-negative");
        }
    }
};

struct NominalGains {
    double k_v = 0.5;
    double k_omega = 1.0;
    double c = 0.1;
};

struct InputBox {
    double v_min = -0.2;
    double v_max = 0.3;
    double omega_min = -0.4;
    double omega_max = 0.4;

    ControlInput clamp(const ControlInput& u) const
    {
        return {std::clamp(u.v, v_min, v_max), std::clamp(u.omega, omega_min, omega_max)};
    }

    bool contains(const ControlInput& u) const
    {
        return u.v >= v_min && u.v <= v_max && u.omega >= omega_min && u.omega <= omega_max;
    }

    // The box as four half-planes.
    std::vector<ConeConstraint> constraints() const
    {
        return {{{1.0, 0.0}, 0.0, v_min},
                {{-1.0, 0.0}, 0.0, -v_max},
                {{0.0, 1.0}, 0.0, omega_min},
                {{0.0, -1.0}, 0.0, -omega_max}};
    }
};

namespace detail {

struct RelativeGeometry {
    double d;
    double theta;
};

inline RelativeGeometry relative(const UnicycleState& s, const Eigen::Vector2d& center)
{
    const double dx = center.x() - s.x;
    const double dy = center.y() - s.y;
    const double d = std::hypot(dx, dy);
    if (d < 1e-9) throw GeometryError("robot is at an obstacle center");
    return {d, std::atan2(dy, dx)};
}

}  // namespace detail

// h = d - r - zeta cos(psi - theta) for one obstacle.
inline double barrier(const UnicycleState& s, const Obstacle& obs, double zeta)
{
    const auto g = detail::relative(s, obs.center);
    return g.d - obs.radius - zeta * std::cos(s.psi - g.theta);
}

struct LieDerivatives {
    double lf = 0.0;
    Eigen::Vector2d lg = Eigen::Vector2d::Zero();  // against (v, omega)
};

inline LieDerivatives lie_derivatives(const UnicycleState& s, const Obstacle& obs, double zeta)
{
    const auto g = detail::relative(s, obs.center);
    const double sn = std::sin(s.psi - g.theta);
    const double cs = std::cos(s.psi - g.theta);
    LieDerivatives out;
    out.lf = 0.0;  // the unicycle has no drift
    out.lg = {-cs + zeta * sn * sn / g.d, zeta * sn};
    return out;
}

inline ControlInput nominal_controller(const UnicycleState& s, const Eigen::Vector2d& goal, const NominalGains& k = {})
{
    const double dx = goal.x() - s.x;
    const double dy = goal.y() - s.y;
    const double dg = std::hypot(dx, dy);
    if (dg < 1e-9) return {0.0, 0.0};
    return {k.k_v * dg + k.c, -k.k_omega * (std::sin(s.psi) - dy / dg)};
}

// One cone per obstacle: Lg v - b|v| >= -alpha h - Lf + phi |Lg|^2 + a.
inline std::vector<ConeConstraint> trop_constraints(const UnicycleState& s, const std::vector<Obstacle>& measured,
                                                    const RobustParams& p, double zeta)
{
    std::vector<ConeConstraint> out;
    out.reserve(measured.size());
    for (const auto& o : measured) {
        const double h = barrier(s, o, zeta);
        const auto ld = lie_derivatives(s, o, zeta);
        out.push_back({ld.lg, p.b, -p.alpha * h - ld.lf + p.phi * ld.lg.squaredNorm() + p.a});
    }
    return out;
}

// Minimally modifies k_nom so every obstacle constraint holds. Returns nullopt
// when no input satisfies them all. Without `box` the program is solved over
// the whole plane; with it the box becomes part of the program.
inline std::optional<ControlInput> trop_filter(const UnicycleState& s, const std::vector<Obstacle>& measured,
                                               const RobustParams& p, double zeta, const ControlInput& k_nom,
                                               const std::optional<InputBox>& box = std::nullopt)
{
    auto cons = trop_constraints(s, measured, p, zeta);
    if (box) {
        auto extra = box->constraints();
        cons.insert(cons.end(), extra.begin(), extra.end());
    }
    if (cons.empty()) return k_nom;
    auto sol = project_onto_cones(k_nom.vec(), cons);
    if (!sol) return std::nullopt;
    return ControlInput::from(sol->u);
}

// gamma(delta) = delta^2 / (4 phi alpha) for the linear class-K function.
inline double issf_bound(double delta, const RobustParams& p)
{
    if (!(p.phi > 0.0)) throw std::domain_error("ISSf bound is unbounded for phi = 0");
    if (!(p.alpha > 0.0)) throw std::domain_error("ISSf bound needs alpha > 0");
    return delta * delta / (4.0 * p.phi * p.alpha);
}

// Region over which Lipschitz coefficients with respect to the obstacle
// center are estimated.
struct BaselineDomain {
    Eigen::Vector2d robot_min{-0.5, -1.5};
    Eigen::Vector2d robot_max{3.5, 1.5};
    Eigen::Vector2d obstacle_min{1.0, -1.0};
    Eigen::Vector2d obstacle_max{2.0, 1.0};
    double min_distance = 0.5;  // robot to obstacle center, both centers of a pair
    double pair_radius = 0.05;  // max |rho' - rho| of a sampled pair
    std::size_t samples = 100000;
    std::uint64_t seed = 0;
};

struct LipschitzEstimate {
    double lf_h = 0.0;         // L_f h
    double h = 0.0;            // h (alpha o h is alpha times this)
    double lg_h = 0.0;         // L_g h
    double lg_h_sq_norm = 0.0; // |L_g h|^2
    std::size_t samples = 0;
    std::uint64_t seed = 0;
};

// Running maximum of difference quotients over random (state, rho, rho')
// triples. The estimate never decreases as `samples` grows for a fixed seed.
inline LipschitzEstimate estimate_lipschitz(const BaselineDomain& dom, double zeta)
{
    if (!(dom.pair_radius > 0.0)) throw std::invalid_argument("pair radius must be positive");
    Rng rng = make_stream(dom.seed, {stream::lipschitz});
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

    LipschitzEstimate est;
    est.seed = dom.seed;
    for (std::size_t n = 0; n < dom.samples;) {
        UnicycleState s{uniform(dom.robot_min.x(), dom.robot_max.x()), uniform(dom.robot_min.y(), dom.robot_max.y()),
                        uniform(-std::numbers::pi, std::numbers::pi)};
        Obstacle o1{{uniform(dom.obstacle_min.x(), dom.obstacle_max.x()),
                     uniform(dom.obstacle_min.y(), dom.obstacle_max.y())},
                    0.0};
        const double ang = uniform(-std::numbers::pi, std::numbers::pi);
        const double r = dom.pair_radius * std::max(unit(rng), 1e-6);
        Obstacle o2{o1.center + r * Eigen::Vector2d(std::cos(ang), std::sin(ang)), 0.0};
        if ((o1.center - s.position()).norm() < dom.min_distance ||
            (o2.center - s.position()).norm() < dom.min_distance) {
            continue;
        }
        ++n;
        const double dr = (o2.center - o1.center).norm();
        const auto l1 = lie_derivatives(s, o1, zeta);
        const auto l2 = lie_derivatives(s, o2, zeta);
        est.h = std::max(est.h, std::abs(barrier(s, o2, zeta) - barrier(s, o1, zeta)) / dr);
        est.lf_h = std::max(est.lf_h, std::abs(l2.lf - l1.lf) / dr);
        est.lg_h = std::max(est.lg_h, (l2.lg - l1.lg).norm() / dr);
        est.lg_h_sq_norm = std::max(est.lg_h_sq_norm, std::abs(l2.lg.squaredNorm() - l1.lg.squaredNorm()) / dr);
    }
    est.samples = dom.samples;
    return est;
}

struct MarginBounds {
    double a = 0.0;
    double b = 0.0;
};

inline MarginBounds conservative_baseline(double epsilon, const LipschitzEstimate& L, double alpha, double phi)
{
    if (!(epsilon >= 0.0)) throw std::invalid_argument("measurement bound must be non-negative");
    return {epsilon * (L.lf_h + alpha * L.h + phi * L.lg_h_sq_norm), epsilon * L.lg_h};
}

inline MarginBounds conservative_baseline(double epsilon, const BaselineDomain& dom, double zeta, double alpha,
                                          double phi)
{
    return conservative_baseline(epsilon, estimate_lipschitz(dom, zeta), alpha, phi);
}

}  // namespace safetune
