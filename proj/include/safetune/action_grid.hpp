#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "safetune/random.hpp"

namespace safetune {

// One axis of the discretized parameter space.
struct Dimension {
    std::string name;
    double min = 0.0;
    double max = 0.0;
    double step = 1.0;

    std::size_t count() const
    {
        return static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
    }
};

class GridSpec {
public:
    GridSpec() = default;

    explicit GridSpec(std::vector<Dimension> dims) : dims_(std::move(dims))
    {
        if (dims_.empty()) {
            throw std::invalid_argument("grid spec needs at least one dimension");
        }
        for (const auto& d : dims_) {
            if (!(d.step > 0.0) || !std::isfinite(d.step)) {
                throw std::invalid_argument("grid dimension '" + d.name + "': step must be positive");
            }
            if (!(d.min <= d.max)) {
                throw std::invalid_argument("grid dimension '" + d.name + "': min exceeds max");
            }
        }
    }

    // alpha, phi, a, b with the bounds and discretization used for the
    // quadruped obstacle-avoidance study.
    static GridSpec robustness_default()
    {
        return GridSpec({{"alpha", 0.5, 5.0, 0.5},
                         {"phi", 0.0, 1.0, 0.1},
                         {"a", 0.0, 1.0, 0.1},
                         {"b", 0.0, 0.05, 0.005}});
    }

    const std::vector<Dimension>& dims() const { return dims_; }
    std::size_t rank() const { return dims_.size(); }

    std::vector<std::size_t> counts() const
    {
        std::vector<std::size_t> c;
        c.reserve(dims_.size());
        for (const auto& d : dims_) c.push_back(d.count());
        return c;
    }

    std::size_t size() const
    {
        std::size_t n = 1;
        for (const auto& d : dims_) n *= d.count();
        return n;
    }

    bool operator==(const GridSpec& o) const
    {
        if (dims_.size() != o.dims_.size()) return false;
        for (std::size_t i = 0; i < dims_.size(); ++i) {
            const auto& a = dims_[i];
            const auto& b = o.dims_[i];
            if (a.name != b.name || a.min != b.min || a.max != b.max || a.step != b.step) return false;
        }
        return true;
    }

private:
    std::vector<Dimension> dims_;
};

// A grid point. `coords` are integer grid coordinates; the same numbers,
// read as reals, are the step-normalized coordinates used for all geometry.
struct Action {
    std::size_t index = 0;
    std::vector<int> coords;
    std::vector<double> values;

    double operator[](std::size_t d) const { return values[d]; }
    bool operator==(const Action& o) const { return index == o.index && coords == o.coords; }
};

struct LineSubspace {
    std::size_t anchor = 0;
    Eigen::VectorXd direction;          // unit vector, step-normalized space
    std::vector<std::size_t> members;   // ordered along the direction
};

// Indexing and geometry over a GridSpec. Row-major: the last dimension varies
// fastest.
class ActionGrid {
public:
    ActionGrid() = default;
    explicit ActionGrid(GridSpec spec) : spec_(std::move(spec)), counts_(spec_.counts())
    {
        strides_.assign(counts_.size(), 1);
        for (std::size_t d = counts_.size(); d-- > 1;) {
            strides_[d - 1] = strides_[d] * counts_[d];
        }
        size_ = spec_.size();
    }

    const GridSpec& spec() const { return spec_; }
    std::size_t size() const { return size_; }
    std::size_t rank() const { return counts_.size(); }
    const std::vector<std::size_t>& counts() const { return counts_; }

    std::vector<int> coords(std::size_t index) const
    {
        check_index(index);
        std::vector<int> c(rank());
        for (std::size_t d = 0; d < rank(); ++d) {
            c[d] = static_cast<int>(index / strides_[d]);
            index %= strides_[d];
        }
        return c;
    }

    bool in_bounds(const std::vector<int>& c) const
    {
        if (c.size() != rank()) return false;
        for (std::size_t d = 0; d < rank(); ++d) {
            if (c[d] < 0 || static_cast<std::size_t>(c[d]) >= counts_[d]) return false;
        }
        return true;
    }

    std::size_t index_of(const std::vector<int>& c) const
    {
        if (!in_bounds(c)) throw std::out_of_range("grid coordinates out of bounds");
        std::size_t idx = 0;
        for (std::size_t d = 0; d < rank(); ++d) idx += static_cast<std::size_t>(c[d]) * strides_[d];
        return idx;
    }

    double value(std::size_t d, int coord) const
    {
        const auto& dim = spec_.dims()[d];
        double v = dim.min + coord * dim.step;
        // Snap away representation noise such as 0.30000000000000004.
        return std::round(v * 1e12) / 1e12;
    }

    Action action(std::size_t index) const
    {
        Action a;
        a.index = index;
        a.coords = coords(index);
        a.values.resize(rank());
        for (std::size_t d = 0; d < rank(); ++d) a.values[d] = value(d, a.coords[d]);
        return a;
    }

    // Nearest grid point to a physical parameter vector (clamped to bounds).
    Action nearest(const std::vector<double>& values) const
    {
        if (values.size() != rank()) throw std::invalid_argument("parameter vector has wrong rank");
        std::vector<int> c(rank());
        for (std::size_t d = 0; d < rank(); ++d) {
            const auto& dim = spec_.dims()[d];
            long k = std::lround((values[d] - dim.min) / dim.step);
            k = std::clamp<long>(k, 0, static_cast<long>(counts_[d]) - 1);
            c[d] = static_cast<int>(k);
        }
        return action(index_of(c));
    }

    Eigen::VectorXd normalized(std::size_t index) const
    {
        auto c = coords(index);
        Eigen::VectorXd v(rank());
        for (std::size_t d = 0; d < rank(); ++d) v[d] = c[d];
        return v;
    }

    double distance(std::size_t i, std::size_t j) const
    {
        return (normalized(i) - normalized(j)).norm();
    }

    double distance(const Action& a, const Action& b) const { return distance(a.index, b.index); }

    // Up to `max_points` grid points nearest to a random line through `anchor`.
    LineSubspace draw_line(std::size_t anchor, Rng& rng, std::size_t max_points) const
    {
        std::normal_distribution<double> normal(0.0, 1.0);
        Eigen::VectorXd dir(rank());
        do {
            for (std::size_t d = 0; d < rank(); ++d) dir[d] = normal(rng);
        } while (dir.norm() < 1e-12);
        dir.normalize();
        return line_through(anchor, dir, max_points);
    }

    // Deterministic part of draw_line: walk the continuous line in half-step
    // increments, round to the grid, keep the `max_points` closest points.
    LineSubspace line_through(std::size_t anchor, const Eigen::VectorXd& direction,
                              std::size_t max_points) const
    {
        check_index(anchor);
        if (direction.size() != static_cast<Eigen::Index>(rank())) {
            throw std::invalid_argument("line direction has wrong rank");
        }
        const Eigen::VectorXd dir = direction.normalized();
        const Eigen::VectorXd origin = normalized(anchor);
        constexpr double increment = 0.5;

        std::vector<std::size_t> found{anchor};
        std::vector<int> c(rank());
        for (double sign : {1.0, -1.0}) {
            for (long k = 1;; ++k) {
                Eigen::VectorXd p = origin + (sign * increment * static_cast<double>(k)) * dir;
                bool inside = true;
                for (std::size_t d = 0; d < rank(); ++d) {
                    if (p[d] < -0.5 || p[d] > static_cast<double>(counts_[d]) - 0.5) {
                        inside = false;
                        break;
                    }
                    c[d] = static_cast<int>(std::lround(p[d]));
                }
                if (!inside) break;
                if (in_bounds(c)) found.push_back(index_of(c));
            }
        }
        std::sort(found.begin(), found.end());
        found.erase(std::unique(found.begin(), found.end()), found.end());

        struct Candidate {
            std::size_t index;
            double off_line;
            double along;
        };
        std::vector<Candidate> cand;
        cand.reserve(found.size());
        for (auto idx : found) {
            Eigen::VectorXd rel = normalized(idx) - origin;
            double t = rel.dot(dir);
            cand.push_back({idx, (rel - t * dir).norm(), t});
        }
        std::sort(cand.begin(), cand.end(), [](const Candidate& x, const Candidate& y) {
            if (x.off_line != y.off_line) return x.off_line < y.off_line;
            if (std::abs(x.along) != std::abs(y.along)) return std::abs(x.along) < std::abs(y.along);
            return x.index < y.index;
        });
        if (max_points == 0) max_points = 1;
        if (cand.size() > max_points) cand.resize(max_points);
        std::sort(cand.begin(), cand.end(), [](const Candidate& x, const Candidate& y) {
            if (x.along != y.along) return x.along < y.along;
            return x.index < y.index;
        });

        LineSubspace line;
        line.anchor = anchor;
        line.direction = dir;
        line.members.reserve(cand.size());
        for (const auto& cd : cand) line.members.push_back(cd.index);
        return line;
    }

private:
    void check_index(std::size_t index) const
    {
        if (index >= size_) throw std::out_of_range("action index out of range");
    }

    GridSpec spec_;
    std::vector<std::size_t> counts_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
};

// All grid points in row-major order.
inline std::vector<Action> build_grid(const GridSpec& spec)
{
    ActionGrid grid(spec);
    std::vector<Action> out;
    out.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) out.push_back(grid.action(i));
    return out;
}

}  // namespace safetune
