#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "safetune/action_grid.hpp"
#include "safetune/learner.hpp"
#include "safetune/random.hpp"
#include "safetune/utility_model.hpp"

namespace safetune {

struct SyntheticTruth {
    Eigen::VectorXd utility;  // one entry per grid action
    std::size_t best = 0;
    std::uint64_t seed = 0;
};

// Draws utilities from the zero-mean GP prior over a whole grid. The Cholesky
// factor is computed once, so many truths can be drawn cheaply.
class TruthSampler {
public:
    static constexpr std::size_t max_points = 4000;

    TruthSampler(const ActionGrid& grid, const KernelConfig& kernel, double jitter = 1e-8)
    {
        if (grid.size() > max_points) {
            throw std::invalid_argument("grid too large for an exact prior draw (" + std::to_string(grid.size()) +
                                        " > " + std::to_string(max_points) + " points)");
        }
        std::vector<std::size_t> all(grid.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        const PriorCovariance prior = prior_covariance(grid, all, kernel, jitter);
        chol_ = prior.llt.matrixL();
    }

    SyntheticTruth draw(std::uint64_t seed) const
    {
        Rng rng = make_stream(seed, {stream::truth});
        std::normal_distribution<double> normal(0.0, 1.0);
        Eigen::VectorXd z(chol_.rows());
        for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = normal(rng);
        SyntheticTruth t;
        t.utility = chol_.triangularView<Eigen::Lower>() * z;
        t.utility.maxCoeff(&t.best);
        t.seed = seed;
        return t;
    }

private:
    Eigen::MatrixXd chol_;
};

inline SyntheticTruth draw_truth(const ActionGrid& grid, const KernelConfig& kernel, std::uint64_t seed)
{
    return TruthSampler(grid, kernel).draw(seed);
}

inline bool bernoulli(double p, Rng& rng)
{
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

// Samples which of a1, a2 is preferred. c_p = 0 gives the noiseless answer.
inline Preference answer_preference(const SyntheticTruth& truth, std::size_t a1, std::size_t a2, double c_p,
                                    Rng& rng)
{
    const double diff = truth.utility[static_cast<Eigen::Index>(a1)] - truth.utility[static_cast<Eigen::Index>(a2)];
    double p_first;
    if (c_p > 0.0) {
        p_first = logistic(diff / c_p);
    } else {
        p_first = diff > 0.0 ? 1.0 : (diff < 0.0 ? 0.0 : 0.5);
    }
    return bernoulli(p_first, rng) ? Preference{a1, a2} : Preference{a2, a1};
}

inline OrdinalLabel answer_ordinal(const SyntheticTruth& truth, std::size_t a, double beta, double c_o, Rng& rng)
{
    const double r = truth.utility[static_cast<Eigen::Index>(a)];
    double p_unsafe;
    if (c_o > 0.0) {
        p_unsafe = logistic((beta - r) / c_o);
    } else {
        p_unsafe = r < beta ? 1.0 : 0.0;
    }
    return {a, bernoulli(p_unsafe, rng) ? Category::unsafe : Category::safe};
}

// Answers every query of a proposal from a synthetic truth. Each iteration
// has its own random stream so answers do not depend on earlier iterations.
class OracleProvider : public FeedbackProvider {
public:
    OracleProvider(const SyntheticTruth& truth, LikelihoodConfig noise, std::uint64_t seed)
        : truth_(truth), noise_(noise), seed_(seed)
    {
    }

    FeedbackDataset answer(const Proposal& p) override
    {
        Rng rng = make_stream(seed_, {stream::oracle, p.iteration});
        FeedbackDataset out;
        for (const auto& q : p.queries) {
            if (q.kind == QueryKind::preference) {
                out.preferences.push_back(answer_preference(truth_, q.first, q.second, noise_.c_p, rng));
            } else {
                out.labels.push_back(answer_ordinal(truth_, q.first, noise_.beta, noise_.c_o, rng));
            }
        }
        return out;
    }

private:
    const SyntheticTruth& truth_;
    LikelihoodConfig noise_;
    std::uint64_t seed_;
};

struct RunTrace {
    std::vector<double> prediction_error;   // per iteration
    std::vector<double> cumulative_unsafe;  // per iteration
};

// Per-iteration mean and standard error across runs.
struct CampaignStats {
    std::optional<double> lambda;
    std::vector<double> error_mean, error_stderr;
    std::vector<double> unsafe_mean, unsafe_stderr;
    std::vector<std::uint64_t> seeds;
};

struct SyntheticCampaignConfig {
    GridSpec grid;
    LearnerConfig learner;     // roi_lambda is overridden per campaign entry
    LikelihoodConfig oracle;   // noise used to generate answers
    std::size_t runs = 50;
    std::uint64_t seed = 0;
};

inline RunTrace run_synthetic(const Learner& learner, const SyntheticTruth& truth, const LikelihoodConfig& oracle,
                              std::uint64_t oracle_seed)
{
    OracleProvider provider(truth, oracle, oracle_seed);
    RunTrace trace;
    double unsafe = 0.0;
    LearnerState s = learner.init();
    while (!learner.finished(s)) {
        s = learner.step(s, provider);
        for (auto a : s.deployed_history.back()) {
            if (truth.utility[static_cast<Eigen::Index>(a)] < oracle.beta) unsafe += 1.0;
        }
        trace.cumulative_unsafe.push_back(unsafe);
        trace.prediction_error.push_back(learner.prediction_error(s, truth.best));
    }
    return trace;
}

inline void mean_stderr(const std::vector<std::vector<double>>& rows, std::vector<double>& mean,
                        std::vector<double>& stderr_out)
{
    const std::size_t n = rows.size();
    const std::size_t len = n ? rows.front().size() : 0;
    mean.assign(len, 0.0);
    stderr_out.assign(len, 0.0);
    for (std::size_t t = 0; t < len; ++t) {
        double s = 0.0;
        for (const auto& r : rows) s += r[t];
        mean[t] = s / static_cast<double>(n);
        if (n > 1) {
            double ss = 0.0;
            for (const auto& r : rows) ss += (r[t] - mean[t]) * (r[t] - mean[t]);
            stderr_out[t] = std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
        }
    }
}

// Runs the learner once per lambda (unset = plain LineCoSpar) on `runs`
// matched truths. Run k uses the same truth, learner seed and oracle seed for
// every lambda.
inline std::vector<CampaignStats> run_campaign(const SyntheticCampaignConfig& cfg,
                                               const std::vector<std::optional<double>>& lambdas)
{
    const ActionGrid grid(cfg.grid);
    const TruthSampler sampler(grid, cfg.learner.kernel, cfg.learner.laplace.jitter);
    std::vector<SyntheticTruth> truths;
    std::vector<std::uint64_t> seeds;
    for (std::size_t k = 0; k < cfg.runs; ++k) {
        Rng rng = make_stream(cfg.seed, {stream::scenario, k});
        seeds.push_back(rng());
        truths.push_back(sampler.draw(seeds.back()));
    }

    std::vector<CampaignStats> out;
    for (const auto& lambda : lambdas) {
        std::vector<std::vector<double>> err, unsafe;
        for (std::size_t k = 0; k < cfg.runs; ++k) {
            LearnerConfig lc = cfg.learner;
            lc.roi_lambda = lambda;
            lc.seed = seeds[k];
            const Learner learner(lc, grid);
            RunTrace tr = run_synthetic(learner, truths[k], cfg.oracle, seeds[k]);
            err.push_back(std::move(tr.prediction_error));
            unsafe.push_back(std::move(tr.cumulative_unsafe));
        }
        CampaignStats st;
        st.lambda = lambda;
        st.seeds = seeds;
        mean_stderr(err, st.error_mean, st.error_stderr);
        mean_stderr(unsafe, st.unsafe_mean, st.unsafe_stderr);
        out.push_back(std::move(st));
    }
    return out;
}

}  // namespace safetune
