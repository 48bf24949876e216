#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance suite. Nothing here calls the solver paths it is used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "safetune/action_grid.hpp"
#include "safetune/cbf.hpp"
#include "safetune/random.hpp"
#include "safetune/socp.hpp"
#include "safetune/utility_model.hpp"

namespace safetune::testing {

// Value-only objective built from the likelihood definitions and an LU-based
// prior solve; shares nothing with the Newton path under test.
inline double objective_oracle(const Eigen::VectorXd& r, const FeedbackDataset& data,
                        const std::vector<std::size_t>& subset, const Eigen::MatrixXd& prior,
                        const LikelihoodConfig& lik)
{
    auto pos = [&](std::size_t idx) {
        for (std::size_t k = 0; k < subset.size(); ++k) {
            if (subset[k] == idx) return static_cast<Eigen::Index>(k);
        }
        return Eigen::Index{-1};
    };
    double v = 0.5 * r.dot(prior.fullPivLu().solve(r));
    for (const auto& p : data.preferences) v -= std::log(pref_likelihood(r[pos(p.preferred)], r[pos(p.other)], lik));
    for (const auto& l : data.labels) v -= std::log(ordinal_likelihood(r[pos(l.action)], l.category, lik));
    return v;
}

// Coarse grid over [-2, 2]^n followed by compass search with step halving.
inline Eigen::VectorXd brute_force_minimizer(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::Index n)
{
    const int per_dim = n <= 4 ? 9 : 5;
    Eigen::VectorXd best = Eigen::VectorXd::Zero(n);
    double best_val = f(best);
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    for (;;) {
        Eigen::VectorXd x(n);
        for (Eigen::Index d = 0; d < n; ++d) x[d] = -2.0 + 4.0 * idx[static_cast<std::size_t>(d)] / (per_dim - 1);
        const double v = f(x);
        if (v < best_val) {
            best_val = v;
            best = x;
        }
        std::size_t d = 0;
        while (d < idx.size() && ++idx[d] == per_dim) idx[d++] = 0;
        if (d == idx.size()) break;
    }
    double step = 0.5;
    while (step > 1e-9) {
        bool improved = false;
        for (Eigen::Index d = 0; d < n; ++d) {
            for (double s : {step, -step}) {
                Eigen::VectorXd x = best;
                x[d] += s;
                const double v = f(x);
                if (v < best_val) {
                    best_val = v;
                    best = x;
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return best;
}

struct Instance {
    ActionGrid grid;
    std::vector<std::size_t> subset;
    FeedbackDataset data;
    KernelConfig kernel;
    LikelihoodConfig lik;
};

inline Instance random_instance(Rng& rng, std::size_t max_subset, std::size_t max_feedback)
{
    Instance in;
    in.grid = ActionGrid(GridSpec({{"x", 0, 9, 1}, {"y", 0, 9, 1}}));
    std::uniform_int_distribution<std::size_t> size_dist(2, max_subset);
    std::uniform_int_distribution<std::size_t> action_dist(0, in.grid.size() - 1);
    const std::size_t n = size_dist(rng);
    while (in.subset.size() < n) {
        const auto a = action_dist(rng);
        if (std::find(in.subset.begin(), in.subset.end(), a) == in.subset.end()) in.subset.push_back(a);
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    in.kernel.signal_variance = 0.5 + unit(rng);
    in.kernel.lengthscales = {1.0 + 3.0 * unit(rng), 1.0 + 3.0 * unit(rng)};
    in.lik.c_p = 0.2 + unit(rng);
    in.lik.c_o = 0.2 + unit(rng);
    in.lik.beta = unit(rng) - 0.5;
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::uniform_int_distribution<std::size_t> count(1, max_feedback);
    const std::size_t m = count(rng);
    for (std::size_t k = 0; k < m; ++k) {
        if (unit(rng) < 0.6) {
            std::size_t i = pick(rng), j = pick(rng);
            while (j == i) j = pick(rng);
            in.data.preferences.push_back({in.subset[i], in.subset[j]});
        } else {
            in.data.labels.push_back({in.subset[pick(rng)], unit(rng) < 0.5 ? Category::unsafe : Category::safe});
        }
    }
    return in;
}

// Smallest |u - k|^2 over a uniform grid on `box` with spacing `res`, among
// points meeting every constraint. nullopt if no grid point is feasible.
inline std::optional<double> grid_search_projection(const Eigen::Vector2d& k, const std::vector<ConeConstraint>& cons,
                                                    const InputBox& box, double res)
{
    const int nv = static_cast<int>(std::lround((box.v_max - box.v_min) / res));
    const int nw = static_cast<int>(std::lround((box.omega_max - box.omega_min) / res));
    std::optional<double> best;
    for (int i = 0; i <= nv; ++i) {
        const double v = box.v_min + i * res;
        for (int j = 0; j <= nw; ++j) {
            const Eigen::Vector2d u(v, box.omega_min + j * res);
            bool ok = true;
            for (const auto& c : cons) {
                if (c.g.dot(u) - c.b * u.norm() < c.c) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            const double obj = (u - k).squaredNorm();
            if (!best || obj < *best) best = obj;
        }
    }
    return best;
}

struct FilterInstance {
    UnicycleState state;
    std::vector<Obstacle> obstacles;
    RobustParams params;
    double zeta = 0.2;
    ControlInput k_nom;
};

// Robot near one to three obstacles, parameters drawn from the tuning ranges
// and a nominal input inside or near the saturation box.
inline FilterInstance random_filter_instance(Rng& rng, std::size_t n_obstacles)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uni = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
    FilterInstance in;
    in.state = {uni(-0.5, 3.5), uni(-1.5, 1.5), uni(-std::numbers::pi, std::numbers::pi)};
    while (in.obstacles.size() < n_obstacles) {
        const double ang = uni(-std::numbers::pi, std::numbers::pi);
        const double dist = uni(0.45, 1.5);
        Obstacle o{in.state.position() + dist * Eigen::Vector2d(std::cos(ang), std::sin(ang)), uni(0.2, 0.5)};
        in.obstacles.push_back(o);
    }
    in.params = {uni(0.5, 5.0), std::round(uni(0.0, 1.0) * 10.0) / 10.0, uni(0.0, 1.0), uni(0.0, 0.05)};
    in.k_nom = {uni(-0.4, 0.6), uni(-0.8, 0.8)};
    return in;
}

}  // namespace safetune::testing
