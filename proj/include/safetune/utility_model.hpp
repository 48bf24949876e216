#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "safetune/action_grid.hpp"
#include "safetune/random.hpp"

namespace safetune {

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Squared-exponential kernel over step-normalized coordinates.
struct KernelConfig {
    double signal_variance = 1.0;
    std::vector<double> lengthscales;  // empty: 1.0 in every dimension

    double lengthscale(std::size_t d) const
    {
        return lengthscales.empty() ? 1.0 : lengthscales.at(d);
    }

    void validate(std::size_t rank) const
    {
        if (!(signal_variance >= 0.0)) throw std::invalid_argument("kernel signal variance must be non-negative");
        if (!lengthscales.empty() && lengthscales.size() != rank) {
            throw std::invalid_argument("kernel needs one lengthscale per grid dimension");
        }
        for (double l : lengthscales) {
            if (!(l > 0.0)) throw std::invalid_argument("kernel lengthscales must be positive");
        }
    }
};

struct LikelihoodConfig {
    double c_p = 0.1;   // preference noise
    double c_o = 0.1;   // ordinal noise
    double beta = 0.0;  // ordinal threshold between unsafe and safe
};

struct Preference {
    std::size_t preferred = 0;
    std::size_t other = 0;
};

enum class Category : int { unsafe = 1, safe = 2 };

struct OrdinalLabel {
    std::size_t action = 0;
    Category category = Category::safe;
};

struct FeedbackDataset {
    std::vector<Preference> preferences;
    std::vector<OrdinalLabel> labels;

    bool empty() const { return preferences.empty() && labels.empty(); }
    std::size_t size() const { return preferences.size() + labels.size(); }

    void append(const FeedbackDataset& other)
    {
        preferences.insert(preferences.end(), other.preferences.begin(), other.preferences.end());
        labels.insert(labels.end(), other.labels.begin(), other.labels.end());
    }
};

inline double logistic(double x)
{
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// -log(logistic(x)), stable for large |x|.
inline double neg_log_logistic(double x)
{
    return x >= 0.0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

inline double kernel(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2, const KernelConfig& cfg)
{
    double q = 0.0;
    for (Eigen::Index d = 0; d < x1.size(); ++d) {
        const double r = (x1[d] - x2[d]) / cfg.lengthscale(static_cast<std::size_t>(d));
        q += r * r;
    }
    return cfg.signal_variance * std::exp(-0.5 * q);
}

inline double kernel(const ActionGrid& grid, std::size_t i, std::size_t j, const KernelConfig& cfg)
{
    return kernel(grid.normalized(i), grid.normalized(j), cfg);
}

inline double pref_likelihood(double r_preferred, double r_other, const LikelihoodConfig& cfg)
{
    return logistic((r_preferred - r_other) / cfg.c_p);
}

inline double ordinal_likelihood(double r, Category category, const LikelihoodConfig& cfg)
{
    const double unsafe = logistic((cfg.beta - r) / cfg.c_o);
    return category == Category::unsafe ? unsafe : 1.0 - unsafe;
}

struct PriorCovariance {
    Eigen::MatrixXd matrix;  // Gram matrix plus jitter on the diagonal
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;
};

inline Eigen::MatrixXd gram_matrix(const std::vector<Eigen::VectorXd>& points, const KernelConfig& cfg)
{
    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        K(i, i) = cfg.signal_variance;
        for (Eigen::Index j = 0; j < i; ++j) {
            K(i, j) = K(j, i) = kernel(points[i], points[j], cfg);
        }
    }
    return K;
}

// Adds diagonal jitter, escalating tenfold until the Cholesky factorization
// succeeds or the jitter exceeds 1e-4 times the signal variance.
inline PriorCovariance regularized_cholesky(const Eigen::MatrixXd& K, double jitter, double signal_variance)
{
    if (K.rows() == 0) throw std::invalid_argument("covariance over an empty subset");
    const double cap = std::max(1e-4 * signal_variance, jitter);
    double j = std::max(jitter, 0.0);
    for (;;) {
        PriorCovariance out;
        out.matrix = K;
        out.matrix.diagonal().array() += j;
        out.llt.compute(out.matrix);
        if (out.llt.info() == Eigen::Success) {
            out.jitter = j;
            return out;
        }
        if (j >= cap) break;
        j = j > 0.0 ? std::min(j * 10.0, cap) : std::min(1e-12 * std::max(signal_variance, 1e-300), cap);
    }
    throw NumericalError("covariance is not positive definite even with jitter " + std::to_string(cap));
}

inline PriorCovariance prior_covariance(const ActionGrid& grid, const std::vector<std::size_t>& subset,
                                        const KernelConfig& cfg, double jitter = 1e-8)
{
    std::vector<Eigen::VectorXd> pts;
    pts.reserve(subset.size());
    for (auto idx : subset) pts.push_back(grid.normalized(idx));
    return regularized_cholesky(gram_matrix(pts, cfg), jitter, cfg.signal_variance);
}

struct ObjectiveValue {
    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
};

// Dataset entries expressed as positions into the subset vector.
struct LocalFeedback {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> preferences;
    std::vector<std::pair<Eigen::Index, Category>> labels;
};

inline LocalFeedback localize(const FeedbackDataset& data, const std::vector<std::size_t>& subset)
{
    std::unordered_map<std::size_t, Eigen::Index> pos;
    for (std::size_t k = 0; k < subset.size(); ++k) pos.emplace(subset[k], static_cast<Eigen::Index>(k));
    auto lookup = [&](std::size_t idx) {
        auto it = pos.find(idx);
        if (it == pos.end()) {
            throw std::invalid_argument("feedback references action " + std::to_string(idx) +
                                        " outside the modeled subset");
        }
        return it->second;
    };
    LocalFeedback out;
    for (const auto& p : data.preferences) {
        if (p.preferred == p.other) throw std::invalid_argument("preference compares an action with itself");
        out.preferences.emplace_back(lookup(p.preferred), lookup(p.other));
    }
    for (const auto& l : data.labels) out.labels.emplace_back(lookup(l.action), l.category);
    return out;
}

// S(r) = -ln P(D | r) + 1/2 r' K^-1 r, with gradient and Hessian.
inline ObjectiveValue neg_log_posterior(const Eigen::VectorXd& r, const LocalFeedback& data,
                                        const Eigen::MatrixXd& prior_inv, const LikelihoodConfig& cfg)
{
    ObjectiveValue out;
    Eigen::VectorXd Kr = prior_inv * r;
    out.value = 0.5 * r.dot(Kr);
    out.gradient = Kr;
    out.hessian = prior_inv;

    for (const auto& [i, j] : data.preferences) {
        const double z = (r[i] - r[j]) / cfg.c_p;
        out.value += neg_log_logistic(z);
        const double s = logistic(-z);
        const double g = s / cfg.c_p;
        out.gradient[i] -= g;
        out.gradient[j] += g;
        const double w = logistic(z) * s / (cfg.c_p * cfg.c_p);
        out.hessian(i, i) += w;
        out.hessian(j, j) += w;
        out.hessian(i, j) -= w;
        out.hessian(j, i) -= w;
    }
    for (const auto& [i, cat] : data.labels) {
        // Unsafe: logistic((beta - r)/c_o); safe: logistic((r - beta)/c_o).
        const double sign = cat == Category::safe ? 1.0 : -1.0;
        const double z = sign * (r[i] - cfg.beta) / cfg.c_o;
        out.value += neg_log_logistic(z);
        out.gradient[i] -= sign * logistic(-z) / cfg.c_o;
        out.hessian(i, i) += logistic(z) * logistic(-z) / (cfg.c_o * cfg.c_o);
    }
    return out;
}

// Gaussian belief over the utilities of a subset of actions.
class PosteriorModel {
public:
    PosteriorModel() = default;

    static PosteriorModel from_moments(std::vector<std::size_t> subset, Eigen::VectorXd mean,
                                       Eigen::MatrixXd covariance)
    {
        if (static_cast<Eigen::Index>(subset.size()) != mean.size() || covariance.rows() != mean.size() ||
            covariance.cols() != mean.size()) {
            throw std::invalid_argument("posterior moments have inconsistent dimensions");
        }
        PosteriorModel p;
        p.subset_ = std::move(subset);
        p.mean_ = std::move(mean);
        p.cov_ = 0.5 * (covariance + covariance.transpose());
        p.stddev_ = p.cov_.diagonal().cwiseMax(0.0).cwiseSqrt();
        auto reg = regularized_cholesky(p.cov_, 0.0, std::max(1e-300, p.cov_.diagonal().maxCoeff()));
        p.chol_ = reg.llt.matrixL();
        return p;
    }

    const std::vector<std::size_t>& subset() const { return subset_; }
    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& covariance() const { return cov_; }
    const Eigen::VectorXd& stddev() const { return stddev_; }
    const Eigen::MatrixXd& cholesky() const { return chol_; }
    std::size_t size() const { return subset_.size(); }

    bool converged = true;
    int iterations = 0;
    double objective = 0.0;

    // Subset position of the largest posterior mean (first on ties).
    Eigen::Index argmax_mean() const
    {
        Eigen::Index best = 0;
        for (Eigen::Index k = 1; k < mean_.size(); ++k) {
            if (mean_[k] > mean_[best]) best = k;
        }
        return best;
    }

    Eigen::Index position(std::size_t action) const
    {
        for (std::size_t k = 0; k < subset_.size(); ++k) {
            if (subset_[k] == action) return static_cast<Eigen::Index>(k);
        }
        return -1;
    }

private:
    std::vector<std::size_t> subset_;
    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
    Eigen::VectorXd stddev_;
    Eigen::MatrixXd chol_;
};

struct LaplaceOptions {
    double jitter = 1e-8;
    double gradient_tolerance = 1e-8;
    int max_iterations = 100;
};

// Laplace approximation from a precomputed prior factorization.
inline PosteriorModel laplace_map(const FeedbackDataset& data, const std::vector<std::size_t>& subset,
                                  const PriorCovariance& prior, const LikelihoodConfig& lik,
                                  const LaplaceOptions& opt = {}, const Eigen::VectorXd* start = nullptr)
{
    const auto n = static_cast<Eigen::Index>(subset.size());
    const LocalFeedback local = localize(data, subset);
    const Eigen::MatrixXd prior_inv = prior.llt.solve(Eigen::MatrixXd::Identity(n, n));

    Eigen::VectorXd r = start ? *start : Eigen::VectorXd::Zero(n);
    ObjectiveValue f = neg_log_posterior(r, local, prior_inv, lik);
    int it = 0;
    bool converged = f.gradient.norm() < opt.gradient_tolerance;
    Eigen::LLT<Eigen::MatrixXd> H;
    while (!converged && it < opt.max_iterations) {
        ++it;
        H.compute(f.hessian);
        if (H.info() != Eigen::Success) throw NumericalError("posterior Hessian is not positive definite");
        const Eigen::VectorXd step = -H.solve(f.gradient);
        const double slope = f.gradient.dot(step);
        double t = 1.0;
        ObjectiveValue trial;
        bool accepted = false;
        if (-slope < 1e-13 * (1.0 + std::abs(f.value))) {
            // Predicted decrease is below what the objective value can resolve;
            // this is the quadratic-convergence region, take the full step.
            trial = neg_log_posterior(r + step, local, prior_inv, lik);
            accepted = trial.gradient.norm() <= f.gradient.norm();
        } else {
            for (int ls = 0; ls < 60; ++ls) {
                trial = neg_log_posterior(r + t * step, local, prior_inv, lik);
                if (trial.value <= f.value + 1e-4 * t * slope) {
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
        }
        if (!accepted) {
            converged = f.gradient.norm() < 1e3 * opt.gradient_tolerance;
            break;
        }
        r += t * step;
        f = std::move(trial);
        converged = f.gradient.norm() < opt.gradient_tolerance;
    }

    H.compute(f.hessian);
    if (H.info() != Eigen::Success) throw NumericalError("posterior Hessian is not positive definite");
    Eigen::MatrixXd cov = H.solve(Eigen::MatrixXd::Identity(n, n));
    PosteriorModel post = PosteriorModel::from_moments(subset, r, std::move(cov));
    post.converged = converged;
    post.iterations = it;
    post.objective = f.value;
    return post;
}

inline PosteriorModel laplace_map(const FeedbackDataset& data, const std::vector<std::size_t>& subset,
                                  const ActionGrid& grid, const KernelConfig& kernel_cfg,
                                  const LikelihoodConfig& lik, const LaplaceOptions& opt = {})
{
    const PriorCovariance prior = prior_covariance(grid, subset, kernel_cfg, opt.jitter);
    return laplace_map(data, subset, prior, lik, opt);
}

// One Thompson draw r ~ N(mean, covariance).
inline Eigen::VectorXd sample_utilities(const PosteriorModel& post, Rng& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(static_cast<Eigen::Index>(post.size()));
    for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = normal(rng);
    return post.mean() + post.cholesky() * z;
}

}  // namespace safetune
