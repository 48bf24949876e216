#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "safetune/action_grid.hpp"
#include "safetune/cbf.hpp"
#include "safetune/config.hpp"
#include "safetune/learner.hpp"
#include "safetune/random.hpp"
#include "safetune/unicycle_sim.hpp"

namespace safetune {

// Every action has exactly one rollout per campaign, so the id is derived from
// the action index.
inline std::string rollout_id(std::size_t action) { return "r" + std::to_string(action); }

inline std::uint64_t rollout_seed(std::uint64_t campaign_seed, std::size_t action)
{
    Rng rng = make_stream(campaign_seed, {stream::rollout, static_cast<std::uint64_t>(action)});
    return rng();
}

inline Rollout run_action(const CampaignConfig& c, const ActionGrid& grid, std::size_t action)
{
    const RobustParams p = RobustParams::from_action(grid.action(action));
    return simulate(p, c.environment, c.simulation, rollout_seed(c.seed, action));
}

// Non-finite values (an empty obstacle set gives min_h = inf) become null.
inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Automated rater for rollouts: progress toward the goal, a bonus for arriving
// early, and penalties for barrier violation and filter infeasibility.
class RolloutScorer {
public:
    RolloutScorer(ScorerConfig cfg, double horizon) : cfg_(cfg), horizon_(horizon) {}

    double score(const Rollout& r) const
    {
        double progress = 0.0;
        if (r.initial_goal_distance > 0.0) {
            progress = std::clamp(1.0 - r.final_goal_distance / r.initial_goal_distance, 0.0, 1.0);
        }
        double s = progress;
        if (r.reached_goal) s += 1.0 + (1.0 - *r.time_to_goal / horizon_);
        if (r.min_h < 0.0) s -= cfg_.violation_weight * (-r.min_h);
        if (r.infeasible_steps > 0) s -= cfg_.infeasible_penalty;
        return s;
    }

    // True when `first` is preferred; ties go to `first`.
    bool prefers_first(const Rollout& first, const Rollout& second) const { return score(first) >= score(second); }

    Category label(const Rollout& r) const { return score_rollout(r).suggested; }

private:
    ScorerConfig cfg_;
    double horizon_;
};

inline const std::vector<std::string>& rollout_columns()
{
    static const std::vector<std::string> cols{"t", "x", "y", "psi", "v_cmd", "omega_cmd", "min_h"};
    return cols;
}

inline json rollout_payload(const CampaignConfig& c, const ActionGrid& grid, std::size_t action, const Rollout& r)
{
    const Action act = grid.action(action);
    json values = json::object();
    for (std::size_t d = 0; d < grid.rank(); ++d) values[grid.spec().dims()[d].name] = act.values[d];

    json samples = json::array();
    for (const auto& s : r.samples) {
        samples.push_back(
            {s.t, s.state.x, s.state.y, s.state.psi, s.command.v, s.command.omega, finite_or_null(s.min_h)});
    }
    const RolloutScorer scorer(c.feedback.scorer, c.simulation.horizon);
    const auto verdict = score_rollout(r);
    json measured = json::array();
    for (const auto& o : c.environment.measured()) {
        measured.push_back({{"center", {o.center.x(), o.center.y()}}, {"radius", o.radius}});
    }
    return {{"id", rollout_id(action)},
            {"action", {{"index", action}, {"values", values}}},
            {"columns", rollout_columns()},
            {"samples", samples},
            {"summary",
             {{"reached_goal", r.reached_goal},
              {"time_to_goal", r.time_to_goal ? json(*r.time_to_goal) : json(nullptr)},
              {"min_h", finite_or_null(r.min_h)},
              {"infeasible_steps", r.infeasible_steps},
              {"saturation_violations", r.saturation_violations},
              {"path_length", r.path_length},
              {"duration", r.duration},
              {"final_goal_distance", r.final_goal_distance},
              {"score", scorer.score(r)},
              {"suggested_label", verdict.suggested == Category::safe ? "safe" : "unsafe"}}},
            {"scene", {{"truth", to_json(c.environment)}, {"measured_obstacles", measured}}}};
}

// CSV rendering of a payload's samples. Each cell is the JSON text of the
// same number, so the two exports agree character for character.
inline std::string rollout_csv(const json& payload, bool header = true, bool with_id = false)
{
    std::string out;
    if (header) {
        if (with_id) out += "rollout,";
        const auto& cols = payload.at("columns");
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (i) out += ',';
            out += cols[i].get<std::string>();
        }
        out += '\n';
    }
    const std::string id = payload.at("id").get<std::string>();
    for (const auto& row : payload.at("samples")) {
        if (with_id) out += id + ",";
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i].dump();
        }
        out += '\n';
    }
    return out;
}

}  // namespace safetune
