#include "safetune/utility_model.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <Eigen/LU>
#include <cmath>
#include <random>

namespace safetune {
namespace {

using testing::brute_force_minimizer;
using testing::objective_oracle;
using testing::random_instance;

TEST(Kernel, Values)
{
    KernelConfig cfg;
    Eigen::VectorXd x(2), y(2);
    x << 1, 2;
    y << 2, 2;
    EXPECT_DOUBLE_EQ(kernel(x, x, cfg), 1.0);
    EXPECT_NEAR(kernel(x, y, cfg), 0.6065306597126334, 1e-15);
    Rng rng = make_stream(3);
    std::normal_distribution<double> n;
    cfg.lengthscales = {0.7, 2.0};
    for (int t = 0; t < 100; ++t) {
        Eigen::VectorXd a(2), b(2);
        a << n(rng), n(rng);
        b << n(rng), n(rng);
        EXPECT_EQ(kernel(a, b, cfg), kernel(b, a, cfg));
    }
}

TEST(PriorCovariance, SmallCases)
{
    ActionGrid grid(GridSpec({{"x", 0, 9, 1}}));
    KernelConfig cfg;
    cfg.signal_variance = 2.0;
    auto one = prior_covariance(grid, {4}, cfg, 1e-6);
    ASSERT_EQ(one.matrix.rows(), 1);
    EXPECT_DOUBLE_EQ(one.matrix(0, 0), 2.0 + 1e-6);

    auto many = prior_covariance(grid, {0, 3, 5, 9}, cfg, 1e-6);
    for (Eigen::Index i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(many.matrix(i, i), 2.0 + 1e-6);

    cfg.signal_variance = 1.0;
    auto toeplitz = prior_covariance(grid, {2, 3, 4}, cfg, 0.0);
    Eigen::Matrix3d expected;
    const double k1 = std::exp(-0.5), k2 = std::exp(-2.0);
    expected << 1, k1, k2, k1, 1, k1, k2, k1, 1;
    EXPECT_LT((toeplitz.matrix - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(PriorCovariance, JitterEscalationAndFailure)
{
    ActionGrid grid(GridSpec({{"x", 0, 9, 1}}));
    KernelConfig cfg;
    cfg.lengthscales = {1e3};  // nearly constant kernel: singular Gram matrix
    auto reg = prior_covariance(grid, {0, 1, 2, 3, 4, 5}, cfg, 1e-12);
    EXPECT_GE(reg.jitter, 1e-12);
    EXPECT_LE(reg.jitter, 1e-4);

    Eigen::Matrix2d indefinite;
    indefinite << 1, 2, 2, 1;
    EXPECT_THROW(regularized_cholesky(indefinite, 1e-8, 1.0), NumericalError);
}

TEST(Likelihood, Preference)
{
    LikelihoodConfig cfg;
    EXPECT_DOUBLE_EQ(pref_likelihood(0.3, 0.3, cfg), 0.5);
    EXPECT_NEAR(pref_likelihood(0.3 + cfg.c_p, 0.3, cfg), 0.7310585786300049, 1e-15);
    EXPECT_DOUBLE_EQ(pref_likelihood(1e3, 0.0, cfg), 1.0);
}

TEST(Likelihood, Ordinal)
{
    LikelihoodConfig cfg;
    cfg.beta = 0.2;
    EXPECT_DOUBLE_EQ(ordinal_likelihood(0.2, Category::unsafe, cfg), 0.5);
    EXPECT_DOUBLE_EQ(ordinal_likelihood(0.2, Category::safe, cfg), 0.5);
    EXPECT_NEAR(ordinal_likelihood(0.2 + cfg.c_o, Category::safe, cfg), 0.7310585786300049, 1e-15);
    for (double r = -3.0; r <= 3.0; r += 0.37) {
        EXPECT_NEAR(ordinal_likelihood(r, Category::unsafe, cfg) + ordinal_likelihood(r, Category::safe, cfg), 1.0,
                    1e-15);
    }
}

TEST(NegLogPosterior, EmptyAndIndifferent)
{
    ActionGrid grid(GridSpec({{"x", 0, 9, 1}}));
    const std::vector<std::size_t> subset{1, 4, 6};
    auto prior = prior_covariance(grid, subset, {});
    Eigen::MatrixXd inv = prior.llt.solve(Eigen::MatrixXd::Identity(3, 3));
    auto f = neg_log_posterior(Eigen::VectorXd::Zero(3), localize({}, subset), inv, {});
    EXPECT_EQ(f.value, 0.0);
    EXPECT_EQ(f.gradient.norm(), 0.0);

    FeedbackDataset one;
    one.preferences.push_back({4, 6});
    auto g = neg_log_posterior(Eigen::VectorXd::Zero(3), localize(one, subset), inv, {});
    EXPECT_NEAR(g.value, std::log(2.0), 1e-15);
}

TEST(NegLogPosterior, RejectsFeedbackOutsideSubset)
{
    FeedbackDataset d;
    d.labels.push_back({99, Category::safe});
    EXPECT_THROW(localize(d, {1, 2}), std::invalid_argument);
    FeedbackDataset self;
    self.preferences.push_back({1, 1});
    EXPECT_THROW(localize(self, {1, 2}), std::invalid_argument);
}

// Central finite differences of the value and of the gradient.
TEST(NegLogPosterior, DerivativesMatchFiniteDifferences)
{
    Rng rng = make_stream(2024);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 100; ++trial) {
        auto in = random_instance(rng, 8, 12);
        const auto n = static_cast<Eigen::Index>(in.subset.size());
        auto prior = prior_covariance(in.grid, in.subset, in.kernel);
        Eigen::MatrixXd inv = prior.llt.solve(Eigen::MatrixXd::Identity(n, n));
        const auto local = localize(in.data, in.subset);
        Eigen::VectorXd r(n);
        for (Eigen::Index k = 0; k < n; ++k) r[k] = normal(rng);
        const auto f = neg_log_posterior(r, local, inv, in.lik);

        const double h = 1e-5;
        Eigen::VectorXd fd_grad(n);
        Eigen::MatrixXd fd_hess(n, n);
        for (Eigen::Index k = 0; k < n; ++k) {
            Eigen::VectorXd rp = r, rm = r;
            rp[k] += h;
            rm[k] -= h;
            const auto fp = neg_log_posterior(rp, local, inv, in.lik);
            const auto fm = neg_log_posterior(rm, local, inv, in.lik);
            fd_grad[k] = (fp.value - fm.value) / (2 * h);
            fd_hess.col(k) = (fp.gradient - fm.gradient) / (2 * h);
        }
        EXPECT_LT((fd_grad - f.gradient).norm() / std::max(1.0, f.gradient.norm()), 1e-5) << "trial " << trial;
        EXPECT_LT((fd_hess - f.hessian).norm() / std::max(1.0, f.hessian.norm()), 1e-5) << "trial " << trial;
    }
}

TEST(Laplace, EmptyDatasetReturnsPrior)
{
    ActionGrid grid(GridSpec({{"x", 0, 9, 1}}));
    const std::vector<std::size_t> subset{0, 2, 3, 7};
    KernelConfig k;
    auto post = laplace_map({}, subset, grid, k, {});
    EXPECT_EQ(post.mean().norm(), 0.0);
    auto prior = prior_covariance(grid, subset, k);
    EXPECT_LT((post.covariance() - prior.matrix).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_TRUE(post.converged);
}

TEST(Laplace, FiveActionsFourPreferencesMatchesBruteForce)
{
    ActionGrid grid(GridSpec({{"x", 0, 9, 1}}));
    const std::vector<std::size_t> subset{1, 2, 4, 5, 8};
    FeedbackDataset d;
    d.preferences = {{2, 1}, {4, 2}, {4, 8}, {5, 8}};
    KernelConfig k;
    k.lengthscales = {2.0};
    LikelihoodConfig lik;
    lik.c_p = 0.5;
    auto post = laplace_map(d, subset, grid, k, lik);
    ASSERT_TRUE(post.converged);
    auto prior = prior_covariance(grid, subset, k);
    auto oracle = brute_force_minimizer(
        [&](const Eigen::VectorXd& r) { return objective_oracle(r, d, subset, prior.matrix, lik); }, 5);
    EXPECT_LT((post.mean() - oracle).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Laplace, SafeLabelPushesUtilityAboveThreshold)
{
    ActionGrid grid(GridSpec({{"x", 0, 9, 1}}));
    FeedbackDataset d;
    d.labels.push_back({3, Category::safe});
    auto post = laplace_map(d, {3, 6}, grid, {}, {});
    EXPECT_GT(post.mean()[0], 0.0);
    FeedbackDataset u;
    u.labels.push_back({3, Category::unsafe});
    EXPECT_LT(laplace_map(u, {3, 6}, grid, {}, {}).mean()[0], 0.0);
}

TEST(Laplace, ConvexObjectiveHasUniqueMinimizer)
{
    Rng rng = make_stream(99);
    std::uniform_real_distribution<double> start(-10.0, 10.0);
    for (int trial = 0; trial < 20; ++trial) {
        auto in = random_instance(rng, 8, 10);
        const auto n = static_cast<Eigen::Index>(in.subset.size());
        auto prior = prior_covariance(in.grid, in.subset, in.kernel);
        auto ref = laplace_map(in.data, in.subset, prior, in.lik);
        ASSERT_TRUE(ref.converged);
        for (int s = 0; s < 5; ++s) {
            Eigen::VectorXd r0(n);
            for (Eigen::Index k = 0; k < n; ++k) r0[k] = start(rng);
            auto other = laplace_map(in.data, in.subset, prior, in.lik, {}, &r0);
            ASSERT_TRUE(other.converged);
            EXPECT_LT((other.mean() - ref.mean()).cwiseAbs().maxCoeff(), 1e-6);
        }
    }
}

TEST(Laplace, PreferenceSeparatesUtilities)
{
    ActionGrid grid(GridSpec({{"x", 0, 9, 1}}));
    FeedbackDataset d;
    d.preferences.push_back({7, 2});
    auto post = laplace_map(d, {2, 7, 5}, grid, {}, {});
    EXPECT_GT(post.mean()[1] - post.mean()[0], 0.0);
}

TEST(Laplace, FeedbackShrinksVariance)
{
    Rng rng = make_stream(5);
    for (int trial = 0; trial < 30; ++trial) {
        auto in = random_instance(rng, 6, 8);
        auto prior = prior_covariance(in.grid, in.subset, in.kernel);
        auto post = laplace_map(in.data, in.subset, prior, in.lik);
        for (Eigen::Index k = 0; k < prior.matrix.rows(); ++k) {
            EXPECT_LE(post.covariance()(k, k), prior.matrix(k, k) + 1e-9);
        }
    }
}

TEST(Laplace, MatchesBruteForceOnRandomInstances)
{
    Rng rng = make_stream(77);
    for (int trial = 0; trial < 5; ++trial) {
        auto in = random_instance(rng, 4, 10);
        auto prior = prior_covariance(in.grid, in.subset, in.kernel);
        auto post = laplace_map(in.data, in.subset, prior, in.lik);
        auto oracle = brute_force_minimizer(
            [&](const Eigen::VectorXd& r) { return objective_oracle(r, in.data, in.subset, prior.matrix, in.lik); },
            static_cast<Eigen::Index>(in.subset.size()));
        EXPECT_LT((post.mean() - oracle).cwiseAbs().maxCoeff(), 1e-3) << "trial " << trial;
    }
}

TEST(Sampling, DegenerateCovarianceReturnsMean)
{
    Eigen::VectorXd mean(3);
    mean << 0.4, -1.0, 2.0;
    auto post = PosteriorModel::from_moments({1, 2, 3}, mean, 1e-12 * Eigen::MatrixXd::Identity(3, 3));
    Rng rng = make_stream(1);
    auto s = sample_utilities(post, rng);
    EXPECT_LT((s - mean).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Sampling, MonteCarloMeanAndDeterminism)
{
    ActionGrid grid(GridSpec({{"x", 0, 9, 1}}));
    FeedbackDataset d;
    d.preferences = {{1, 3}, {3, 5}};
    d.labels = {{1, Category::safe}};
    auto post = laplace_map(d, {1, 3, 5, 8}, grid, {}, {});
    Rng rng = make_stream(123);
    const int draws = 100000;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(4);
    for (int k = 0; k < draws; ++k) sum += sample_utilities(post, rng);
    const Eigen::VectorXd mc = sum / draws;
    for (Eigen::Index k = 0; k < 4; ++k) {
        const double se = post.stddev()[k] / std::sqrt(static_cast<double>(draws));
        EXPECT_LT(std::abs(mc[k] - post.mean()[k]), 3 * se) << k;
    }
    Rng a = make_stream(42), b = make_stream(42);
    EXPECT_EQ(sample_utilities(post, a), sample_utilities(post, b));
}

}  // namespace
}  // namespace safetune
