#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "safetune/cbf.hpp"
#include "safetune/random.hpp"
#include "safetune/utility_model.hpp"

namespace safetune {

enum class DisturbanceKind { none, worst_case, bounded_noise };

struct DisturbanceSpec {
    double bound = 0.0;  // delta
    DisturbanceKind kind = DisturbanceKind::none;
};

// True obstacles, what the robot measures of them, and the task.
struct Environment {
    UnicycleState start;
    Eigen::Vector2d goal = Eigen::Vector2d::Zero();
    std::vector<Obstacle> obstacles;
    double zeta = 0.2;
    Eigen::Vector2d measurement_shift = Eigen::Vector2d::Zero();
    double measurement_bound = 0.0;  // epsilon, at least |measurement_shift|

    std::vector<Obstacle> measured() const
    {
        std::vector<Obstacle> m = obstacles;
        for (auto& o : m) o.center += measurement_shift;
        return m;
    }
};

struct SimConfig {
    double control_period = 0.05;
    double dt = 0.001;
    double horizon = 30.0;
    double goal_tolerance = 0.1;
    DisturbanceSpec disturbance;
    NominalGains gains;
    std::optional<InputBox> saturation = InputBox{};
    // Re-evaluates the controller at every integrator stage instead of
    // holding it for a control period.
    bool continuous_feedback = false;

    std::size_t substeps() const
    {
        const double r = control_period / dt;
        const auto n = static_cast<std::size_t>(std::llround(r));
        if (n == 0 || std::abs(r - static_cast<double>(n)) > 1e-9 * r) {
            throw std::invalid_argument("integrator step must divide the control period");
        }
        return n;
    }

    void validate() const
    {
        if (!(dt > 0.0) || !(control_period > 0.0)) throw std::invalid_argument("time steps must be positive");
        if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
        if (!(disturbance.bound >= 0.0)) throw std::invalid_argument("disturbance bound must be non-negative");
        substeps();
    }
};

// One record per control period.
struct RolloutSample {
    double t = 0.0;
    UnicycleState state;
    ControlInput command;  // after saturation
    ControlInput applied;  // command plus disturbance at the sample time
    double min_h = std::numeric_limits<double>::infinity();
};

struct Rollout {
    std::vector<RolloutSample> samples;
    bool reached_goal = false;
    std::optional<double> time_to_goal;
    std::size_t infeasible_steps = 0;
    std::size_t saturation_violations = 0;  // clamping broke a satisfied constraint
    double min_h = std::numeric_limits<double>::infinity();
    double initial_goal_distance = 0.0;
    double final_goal_distance = 0.0;
    double path_length = 0.0;
    double duration = 0.0;
};

inline double min_barrier(const UnicycleState& s, const std::vector<Obstacle>& obs, double zeta,
                          std::size_t* which = nullptr)
{
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const double h = barrier(s, obs[i], zeta);
        if (h < m) {
            m = h;
            if (which) *which = i;
        }
    }
    return m;
}

namespace detail {

struct ControlDecision {
    ControlInput command;
    bool feasible = true;
    bool clamp_broke = false;
};

inline ControlDecision decide(const UnicycleState& s, const Environment& env, const std::vector<Obstacle>& measured,
                              const RobustParams& p, const SimConfig& cfg)
{
    ControlDecision out;
    const ControlInput k = nominal_controller(s, env.goal, cfg.gains);
    auto u = trop_filter(s, measured, p, env.zeta, k);
    if (!u) {
        out.feasible = false;
        u = k;
    }
    out.command = *u;
    if (cfg.saturation) {
        out.command = cfg.saturation->clamp(*u);
        if (out.feasible && (out.command.v != u->v || out.command.omega != u->omega)) {
            for (const auto& c : trop_constraints(s, measured, p, env.zeta)) {
                if (c.residual(out.command.vec()) < -1e-9 * c.scale(out.command.vec())) {
                    out.clamp_broke = true;
                    break;
                }
            }
        }
    }
    return out;
}

class DisturbanceSource {
public:
    DisturbanceSource(const DisturbanceSpec& spec, std::uint64_t seed)
        : spec_(spec), rng_(make_stream(seed, {stream::disturbance}))
    {
    }

    // Called once per control period for the noise kind.
    void advance()
    {
        if (spec_.kind != DisturbanceKind::bounded_noise) return;
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const double r = spec_.bound * std::sqrt(unit(rng_));
        const double a = 2.0 * std::numbers::pi * unit(rng_);
        noise_ = {r * std::cos(a), r * std::sin(a)};
    }

    Eigen::Vector2d at(const UnicycleState& s, const std::vector<Obstacle>& truth, double zeta) const
    {
        Eigen::Vector2d d = Eigen::Vector2d::Zero();
        switch (spec_.kind) {
        case DisturbanceKind::none:
            break;
        case DisturbanceKind::bounded_noise:
            d = noise_;
            break;
        case DisturbanceKind::worst_case: {
            if (truth.empty() || spec_.bound == 0.0) break;
            std::size_t i = 0;
            min_barrier(s, truth, zeta, &i);
            const Eigen::Vector2d lg = lie_derivatives(s, truth[i], zeta).lg;
            const double n = lg.norm();
            if (n > 0.0) d = (-spec_.bound / n) * lg;
            break;
        }
        }
        if (d.norm() > spec_.bound * (1.0 + 1e-12) + 1e-15) {
            throw std::logic_error("disturbance exceeded its bound");
        }
        return d;
    }

private:
    DisturbanceSpec spec_;
    Rng rng_;
    Eigen::Vector2d noise_ = Eigen::Vector2d::Zero();
};

inline Eigen::Vector3d unicycle_rate(const UnicycleState& s, const Eigen::Vector2d& u)
{
    return {std::cos(s.psi) * u.x(), std::sin(s.psi) * u.x(), u.y()};
}

inline UnicycleState advance(const UnicycleState& s, const Eigen::Vector3d& delta)
{
    return {s.x + delta.x(), s.y + delta.y(), s.psi + delta.z()};
}

}  // namespace detail

// Closed-loop episode of the filtered unicycle. Deterministic given `seed`.
inline Rollout simulate(const RobustParams& params, const Environment& env, const SimConfig& cfg, std::uint64_t seed)
{
    cfg.validate();
    params.validate();
    const std::vector<Obstacle> measured = env.measured();
    const std::size_t n_sub = cfg.substeps();
    detail::DisturbanceSource dist(cfg.disturbance, seed);

    Rollout out;
    UnicycleState s = env.start;
    s.psi = wrap_angle(s.psi);
    double t = 0.0;
    std::size_t k = 0;
    const auto goal_distance = [&](const UnicycleState& q) { return (env.goal - q.position()).norm(); };
    out.initial_goal_distance = goal_distance(s);
    out.min_h = min_barrier(s, env.obstacles, env.zeta);

    // Closed-loop rate at an intermediate stage of the continuous-feedback mode.
    auto stage_rate = [&](const UnicycleState& q) {
        const auto dec = detail::decide(q, env, measured, params, cfg);
        return detail::unicycle_rate(q, dec.command.vec() + dist.at(q, env.obstacles, env.zeta));
    };

    while (true) {
        const double dg = goal_distance(s);
        if (dg <= cfg.goal_tolerance) {
            out.reached_goal = true;
            out.time_to_goal = t;
            break;
        }
        if (t >= cfg.horizon - 1e-12) break;

        dist.advance();
        const auto dec = detail::decide(s, env, measured, params, cfg);
        if (!dec.feasible) ++out.infeasible_steps;
        if (dec.clamp_broke) ++out.saturation_violations;

        RolloutSample rec;
        rec.t = t;
        rec.state = s;
        rec.command = dec.command;
        rec.applied = ControlInput::from(dec.command.vec() + dist.at(s, env.obstacles, env.zeta));
        rec.min_h = min_barrier(s, env.obstacles, env.zeta);
        out.samples.push_back(rec);

        bool done = false;
        for (std::size_t j = 0; j < n_sub; ++j) {
            const double h = cfg.dt;
            Eigen::Vector3d k1, k2, k3, k4;
            if (cfg.continuous_feedback) {
                k1 = stage_rate(s);
                k2 = stage_rate(detail::advance(s, 0.5 * h * k1));
                k3 = stage_rate(detail::advance(s, 0.5 * h * k2));
                k4 = stage_rate(detail::advance(s, h * k3));
            } else {
                auto rate = [&](const UnicycleState& q) {
                    return detail::unicycle_rate(q, dec.command.vec() + dist.at(q, env.obstacles, env.zeta));
                };
                k1 = rate(s);
                k2 = rate(detail::advance(s, 0.5 * h * k1));
                k3 = rate(detail::advance(s, 0.5 * h * k2));
                k4 = rate(detail::advance(s, h * k3));
            }
            const UnicycleState prev = s;
            s = detail::advance(s, (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
            s.psi = wrap_angle(s.psi);
            out.path_length += (s.position() - prev.position()).norm();
            t = static_cast<double>(k) * cfg.control_period + static_cast<double>(j + 1) * cfg.dt;
            out.min_h = std::min(out.min_h, min_barrier(s, env.obstacles, env.zeta));
            if (goal_distance(s) <= cfg.goal_tolerance) {
                done = true;
                break;
            }
        }
        ++k;
        if (!done) t = static_cast<double>(k) * cfg.control_period;
    }
    out.duration = t;
    out.final_goal_distance = goal_distance(s);
    return out;
}

struct RolloutScore {
    bool reached_goal = false;
    std::optional<double> time_to_goal;
    double path_length = 0.0;
    Category suggested = Category::safe;
};

inline RolloutScore score_rollout(const Rollout& r)
{
    RolloutScore s;
    s.reached_goal = r.reached_goal;
    s.time_to_goal = r.time_to_goal;
    s.path_length = r.path_length;
    s.suggested = (r.min_h < 0.0 || r.infeasible_steps > 0) ? Category::unsafe : Category::safe;
    return s;
}

}  // namespace safetune
