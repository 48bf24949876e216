#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace safetune {

// g'u - b|u| >= c, a convex second-order cone constraint on u in R^2.
struct ConeConstraint {
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    double b = 0.0;
    double c = 0.0;

    double residual(const Eigen::Vector2d& u) const { return g.dot(u) - b * u.norm() - c; }

    // Scale used for relative feasibility tolerances.
    double scale(const Eigen::Vector2d& u) const { return 1.0 + std::abs(c) + (g.norm() + b) * u.norm(); }
};

struct ProjectionResult {
    Eigen::Vector2d u = Eigen::Vector2d::Zero();
    double objective = 0.0;  // |u - k|^2
};

namespace detail {

inline constexpr double feasibility_tol = 1e-10;

inline bool feasible(const std::vector<ConeConstraint>& cons, const Eigen::Vector2d& u)
{
    for (const auto& c : cons) {
        if (c.residual(u) < -feasibility_tol * c.scale(u)) return false;
    }
    return true;
}

// Stationary point of |u-k|^2 - mu (g'u - b|u| - c) for a given multiplier.
inline Eigen::Vector2d cone_point(const Eigen::Vector2d& k, const ConeConstraint& c, double mu)
{
    const Eigen::Vector2d w = k + 0.5 * mu * c.g;
    const double nw = w.norm();
    if (c.b == 0.0) return w;
    if (nw <= 0.5 * mu * c.b) return Eigen::Vector2d::Zero();
    return (1.0 - 0.5 * mu * c.b / nw) * w;
}

// Projection of k onto a single cone. The constraint residual along the
// multiplier path is nondecreasing, so the active multiplier is found by
// bisection (or in closed form for half-planes).
inline std::optional<Eigen::Vector2d> project_single(const Eigen::Vector2d& k, const ConeConstraint& c)
{
    if (c.b == 0.0) {
        const double gg = c.g.squaredNorm();
        if (gg == 0.0) return std::nullopt;
        return Eigen::Vector2d(k + ((c.c - c.g.dot(k)) / gg) * c.g);
    }
    auto F = [&](double mu) { return c.residual(cone_point(k, c, mu)); };
    double lo = 0.0;
    double hi = 1.0;
    while (F(hi) < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e15) return std::nullopt;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-17 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (F(mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const Eigen::Vector2d u = cone_point(k, c, hi);
    if (u.isZero(0.0)) return std::nullopt;  // the origin is tried separately
    return u;
}

// Points where both cone boundaries pass, away from the origin. Writing
// u = rho*e with |e| = 1 turns the pair of boundary equations into a linear
// condition on e.
inline void intersect_pair(const ConeConstraint& ci, const ConeConstraint& cj, std::vector<Eigen::Vector2d>& out)
{
    // Solve c_j (g_i'e - b_i) = c_i (g_j'e - b_j), i.e. m'e = q.
    const Eigen::Vector2d mv = cj.c * ci.g - ci.c * cj.g;
    const double q = cj.c * ci.b - ci.c * cj.b;
    const double mm = mv.squaredNorm();
    if (mm == 0.0) return;
    const double nm = std::sqrt(mm);
    const double cosang = q / nm;
    if (std::abs(cosang) > 1.0 + 1e-12) return;
    const double along = std::clamp(cosang, -1.0, 1.0);
    const double across = std::sqrt(std::max(0.0, 1.0 - along * along));
    const Eigen::Vector2d mhat = mv / nm;
    const Eigen::Vector2d perp(-mhat.y(), mhat.x());
    for (double s : {1.0, -1.0}) {
        const Eigen::Vector2d e = along * mhat + s * across * perp;
        const double di = ci.g.dot(e) - ci.b;
        const double dj = cj.g.dot(e) - cj.b;
        const ConeConstraint& pick = std::abs(di) >= std::abs(dj) ? ci : cj;
        const double d = std::abs(di) >= std::abs(dj) ? di : dj;
        if (d == 0.0) continue;
        const double rho = pick.c / d;
        if (rho > 0.0 && std::isfinite(rho)) out.push_back(rho * e);
        if (across == 0.0) break;
    }
}

}  // namespace detail

// Euclidean projection of k onto the intersection of cone constraints in R^2,
// or nullopt when the intersection is empty.
//
// The minimizer is the unique point of the convex feasible set closest to k.
// Its active set has at most two members away from the origin, so it is one
// of: k itself, a single-cone projection, a pairwise boundary intersection,
// or the origin. All candidates are enumerated and the closest feasible one
// wins.
inline std::optional<ProjectionResult> project_onto_cones(const Eigen::Vector2d& k,
                                                          const std::vector<ConeConstraint>& cons)
{
    if (detail::feasible(cons, k)) return ProjectionResult{k, 0.0};

    std::vector<Eigen::Vector2d> cand;
    cand.push_back(Eigen::Vector2d::Zero());
    for (const auto& c : cons) {
        if (auto u = detail::project_single(k, c)) cand.push_back(*u);
    }
    for (std::size_t i = 0; i < cons.size(); ++i) {
        for (std::size_t j = i + 1; j < cons.size(); ++j) detail::intersect_pair(cons[i], cons[j], cand);
    }

    std::optional<ProjectionResult> best;
    for (const auto& u : cand) {
        if (!detail::feasible(cons, u)) continue;
        const double obj = (u - k).squaredNorm();
        if (!best || obj < best->objective) best = ProjectionResult{u, obj};
    }
    return best;
}

}  // namespace safetune
