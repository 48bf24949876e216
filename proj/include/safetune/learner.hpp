#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "safetune/action_grid.hpp"
#include "safetune/random.hpp"
#include "safetune/utility_model.hpp"

namespace safetune {

struct LearnerConfig {
    std::size_t actions_per_iteration = 3;  // s
    std::size_t iterations = 30;            // N
    // ROI confidence. Unset disables the region of interest, which gives
    // plain LineCoSpar.
    std::optional<double> roi_lambda = -0.5;
    std::size_t line_points = 25;  // e
    std::uint64_t seed = 0;
    KernelConfig kernel;
    LikelihoodConfig likelihood;
    LaplaceOptions laplace;

    void validate(const ActionGrid& grid) const
    {
        if (actions_per_iteration < 1) throw std::invalid_argument("actions_per_iteration must be at least 1");
        if (iterations < 1) throw std::invalid_argument("iterations must be at least 1");
        if (line_points < 1) throw std::invalid_argument("line_points must be at least 1");
        if (actions_per_iteration > grid.size()) {
            throw std::invalid_argument("actions_per_iteration exceeds the number of grid actions");
        }
        if (!(likelihood.c_p > 0.0) || !(likelihood.c_o > 0.0)) {
            throw std::invalid_argument("likelihood noise parameters must be positive");
        }
        kernel.validate(grid.rank());
    }
};

enum class QueryKind { preference, ordinal };

// A question for the rater. Preference queries compare `first` and `second`;
// ordinal queries ask for a safe/unsafe label of `first`.
struct Query {
    QueryKind kind = QueryKind::ordinal;
    std::size_t first = 0;
    std::size_t second = 0;

    bool operator==(const Query&) const = default;
};

// Everything decided for one iteration before the actions are deployed.
struct Proposal {
    std::size_t iteration = 0;
    std::optional<std::size_t> previous_best;
    std::optional<LineSubspace> line;
    std::vector<std::size_t> subset;        // S_i, visited actions first
    std::vector<std::size_t> roi;           // members of S_i eligible for sampling
    bool roi_fallback = false;
    std::vector<std::size_t> draws;         // one argmax per Thompson draw, duplicates kept
    std::vector<std::size_t> deployed;      // distinct draws in draw order
    std::vector<Query> queries;
};

struct LearnerState {
    std::size_t iteration = 0;  // iterations whose feedback has been committed
    std::vector<std::size_t> visited;
    FeedbackDataset dataset;
    std::optional<std::size_t> best;
    PosteriorModel posterior;  // over `visited`
    std::vector<std::vector<std::size_t>> deployed_history;
    std::size_t nonconverged_fits = 0;
};

// Positions in `post` whose optimistic score r + lambda*sigma exceeds beta.
// An empty result is replaced by the single position maximizing the score.
inline std::vector<Eigen::Index> region_of_interest(const PosteriorModel& post, double lambda, double beta,
                                                    bool* fell_back = nullptr)
{
    std::vector<Eigen::Index> roi;
    const auto n = static_cast<Eigen::Index>(post.size());
    Eigen::Index best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < n; ++k) {
        const double score = post.mean()[k] + lambda * post.stddev()[k];
        if (score > beta) roi.push_back(k);
        if (score > best_score) {
            best_score = score;
            best = k;
        }
    }
    if (fell_back) *fell_back = roi.empty();
    if (roi.empty() && n > 0) roi.push_back(best);
    return roi;
}

// Queries offered after deploying `deployed`: each new action against the
// previous believed best, all pairs of new actions, and one label per new
// action.
inline std::vector<Query> build_queries(const std::vector<std::size_t>& deployed,
                                        std::optional<std::size_t> previous_best)
{
    std::vector<Query> q;
    if (previous_best) {
        for (auto a : deployed) {
            if (a != *previous_best) q.push_back({QueryKind::preference, a, *previous_best});
        }
    }
    for (std::size_t j = 0; j < deployed.size(); ++j) {
        for (std::size_t k = j + 1; k < deployed.size(); ++k) {
            q.push_back({QueryKind::preference, deployed[j], deployed[k]});
        }
    }
    for (auto a : deployed) q.push_back({QueryKind::ordinal, a, a});
    return q;
}

class FeedbackProvider {
public:
    virtual ~FeedbackProvider() = default;
    virtual FeedbackDataset answer(const Proposal& proposal) = 0;
};

class Learner {
public:
    Learner(LearnerConfig config, ActionGrid grid) : cfg_(std::move(config)), grid_(std::move(grid))
    {
        if (grid_.size() == 0) throw std::invalid_argument("learner needs a nonempty grid");
        cfg_.validate(grid_);
    }

    const LearnerConfig& config() const { return cfg_; }
    const ActionGrid& grid() const { return grid_; }

    LearnerState init() const { return {}; }

    bool finished(const LearnerState& state) const { return state.iteration >= cfg_.iterations; }

    Proposal propose(const LearnerState& state) const
    {
        Proposal p;
        p.iteration = state.iteration + 1;
        if (state.iteration == 0) {
            Rng rng = make_stream(cfg_.seed, {stream::init});
            p.deployed = sample_distinct(rng, cfg_.actions_per_iteration);
            p.draws = p.deployed;
            p.subset = p.deployed;
            p.roi = p.deployed;
            p.queries = build_queries(p.deployed, std::nullopt);
            return p;
        }

        const std::size_t anchor = *state.best;
        p.previous_best = anchor;
        Rng line_rng = make_stream(cfg_.seed, {stream::line, p.iteration});
        p.line = grid_.draw_line(anchor, line_rng, cfg_.line_points);

        p.subset = state.visited;
        std::unordered_set<std::size_t> in_subset(p.subset.begin(), p.subset.end());
        for (auto m : p.line->members) {
            if (in_subset.insert(m).second) p.subset.push_back(m);
        }

        PosteriorModel post = fit(state.dataset, p.subset);
        std::vector<Eigen::Index> roi;
        if (cfg_.roi_lambda) {
            roi = region_of_interest(post, *cfg_.roi_lambda, cfg_.likelihood.beta, &p.roi_fallback);
        } else {
            roi.resize(p.subset.size());
            for (std::size_t k = 0; k < roi.size(); ++k) roi[k] = static_cast<Eigen::Index>(k);
        }
        for (auto k : roi) p.roi.push_back(p.subset[static_cast<std::size_t>(k)]);

        Rng ts_rng = make_stream(cfg_.seed, {stream::thompson, p.iteration});
        for (std::size_t j = 0; j < cfg_.actions_per_iteration; ++j) {
            const Eigen::VectorXd r = sample_utilities(post, ts_rng);
            Eigen::Index pick = roi.front();
            for (auto k : roi) {
                if (r[k] > r[pick]) pick = k;
            }
            const std::size_t action = p.subset[static_cast<std::size_t>(pick)];
            p.draws.push_back(action);
            if (std::find(p.deployed.begin(), p.deployed.end(), action) == p.deployed.end()) {
                p.deployed.push_back(action);
            }
        }
        p.queries = build_queries(p.deployed, p.previous_best);
        return p;
    }

    LearnerState commit(const LearnerState& state, const Proposal& p, const FeedbackDataset& feedback) const
    {
        if (p.iteration != state.iteration + 1) {
            throw std::invalid_argument("proposal does not follow the current learner iteration");
        }
        LearnerState next = state;
        for (auto a : p.deployed) {
            if (std::find(next.visited.begin(), next.visited.end(), a) == next.visited.end()) {
                next.visited.push_back(a);
            }
        }
        // Validates that feedback only references visited actions.
        localize(feedback, next.visited);
        next.dataset.append(feedback);
        next.deployed_history.push_back(p.deployed);
        next.iteration = p.iteration;
        next.posterior = fit(next.dataset, next.visited);
        if (!next.posterior.converged) ++next.nonconverged_fits;
        next.best = next.visited[static_cast<std::size_t>(next.posterior.argmax_mean())];
        return next;
    }

    // One full iteration. The input state is left untouched if the provider
    // throws.
    LearnerState step(const LearnerState& state, FeedbackProvider& provider) const
    {
        Proposal p = propose(state);
        FeedbackDataset fb = provider.answer(p);
        return commit(state, p, fb);
    }

    LearnerState run(FeedbackProvider& provider) const
    {
        LearnerState s = init();
        while (!finished(s)) s = step(s, provider);
        return s;
    }

    // Rebuilds a state from its persisted ingredients.
    LearnerState restore(std::size_t iteration, std::vector<std::size_t> visited, FeedbackDataset dataset,
                         std::vector<std::vector<std::size_t>> history) const
    {
        LearnerState s;
        s.iteration = iteration;
        s.visited = std::move(visited);
        s.dataset = std::move(dataset);
        s.deployed_history = std::move(history);
        if (!s.visited.empty()) {
            s.posterior = fit(s.dataset, s.visited);
            s.best = s.visited[static_cast<std::size_t>(s.posterior.argmax_mean())];
        }
        return s;
    }

    PosteriorModel fit(const FeedbackDataset& data, const std::vector<std::size_t>& subset) const
    {
        const PriorCovariance prior = prior_covariance(grid_, subset, cfg_.kernel, cfg_.laplace.jitter);
        return laplace_map(data, subset, prior, cfg_.likelihood, cfg_.laplace);
    }

    double prediction_error(const LearnerState& state, std::size_t true_best) const
    {
        if (!state.best) throw std::logic_error("no believed best before the first iteration");
        return grid_.distance(*state.best, true_best);
    }

private:
    std::vector<std::size_t> sample_distinct(Rng& rng, std::size_t count) const
    {
        std::uniform_int_distribution<std::size_t> pick(0, grid_.size() - 1);
        std::vector<std::size_t> out;
        while (out.size() < count) {
            const std::size_t a = pick(rng);
            if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
        }
        return out;
    }

    LearnerConfig cfg_;
    ActionGrid grid_;
};

}  // namespace safetune
