#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "specfid/core/curve.hpp"

namespace specfid {

/// Euclidean distance from p to the closed segment [a, b].
template <typename Scalar>
Scalar point_segment_distance(const Eigen::Matrix<Scalar, 1, 2>& p, const Eigen::Matrix<Scalar, 1, 2>& a,
                              const Eigen::Matrix<Scalar, 1, 2>& b)
{
    const Eigen::Matrix<Scalar, 1, 2> d = b - a;
    const Eigen::Matrix<Scalar, 1, 2> ap = p - a;
    const Scalar len2 = d.squaredNorm();
    Scalar t = len2 > Scalar(0) ? ap.dot(d) / len2 : Scalar(0);
    t = std::clamp(t, Scalar(0), Scalar(1));
    return (ap - t * d).norm();
}

namespace detail {

/// Farthest interior point of (first, last) from the chord; ties keep the lowest index.
template <typename Derived>
std::pair<Eigen::Index, typename Derived::Scalar> farthest_from_chord(const Eigen::MatrixBase<Derived>& pts,
                                                                       Eigen::Index first, Eigen::Index last)
{
    using Scalar = typename Derived::Scalar;
    using Row = Eigen::Matrix<Scalar, 1, 2>;
    const Row a = pts.row(first);
    const Row b = pts.row(last);
    Eigen::Index best = -1;
    Scalar best_dist = -1;
    for (Eigen::Index i = first + 1; i < last; ++i) {
        const Scalar dist = point_segment_distance<Scalar>(pts.row(i), a, b);
        if (dist > best_dist) {
            best_dist = dist;
            best = i;
        }
    }
    return {best, best_dist};
}

} // namespace detail

/// Ramer–Douglas–Peucker on an x-ordered polyline (unit-square coordinates
/// expected). Returns the retained row indices in ascending order; both
/// endpoints are always kept. Uses an explicit work stack, so staircase
/// inputs that split N times do not grow the call stack.
template <typename Derived>
IndexSet rdp_simplify(const Eigen::MatrixBase<Derived>& pts, typename Derived::Scalar epsilon)
{
    const Eigen::Index n = pts.rows();
    if (n == 0)
        return {};
    if (n == 1)
        return {0};
    std::vector<char> keep(static_cast<std::size_t>(n), 0);
    keep.front() = keep.back() = 1;

    std::vector<std::pair<Eigen::Index, Eigen::Index>> work{{0, n - 1}};
    while (!work.empty()) {
        const auto [first, last] = work.back();
        work.pop_back();
        if (last - first < 2)
            continue;
        const auto [split, dist] = detail::farthest_from_chord(pts, first, last);
        if (dist > epsilon) {
            keep[static_cast<std::size_t>(split)] = 1;
            work.emplace_back(split, last);
            work.emplace_back(first, split);
        }
    }
    IndexSet out;
    for (Eigen::Index i = 0; i < n; ++i)
        if (keep[static_cast<std::size_t>(i)])
            out.push_back(i);
    return out;
}

/// Per-point retention threshold: rdp_simplify(pts, eps) keeps exactly the
/// endpoints plus every i with importance[i] > eps. Endpoints get +inf.
///
/// A split point survives only if every enclosing split survived, so its
/// threshold is the minimum chord distance along its ancestry. Computing this
/// once lets a budget search evaluate |RDP(eps)| in O(N) per probe.
template <typename Derived>
Vector<typename Derived::Scalar> rdp_importance(const Eigen::MatrixBase<Derived>& pts)
{
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = pts.rows();
    Vector<Scalar> importance = Vector<Scalar>::Zero(n);
    if (n == 0)
        return importance;
    importance(0) = importance(n - 1) = std::numeric_limits<Scalar>::infinity();

    struct Item {
        Eigen::Index first, last;
        Scalar bound;
    };
    std::vector<Item> work{{0, n - 1, std::numeric_limits<Scalar>::infinity()}};
    while (!work.empty()) {
        const Item it = work.back();
        work.pop_back();
        if (it.last - it.first < 2)
            continue;
        const auto [split, dist] = detail::farthest_from_chord(pts, it.first, it.last);
        if (dist > Scalar(0)) {
            const Scalar eff = std::min(dist, it.bound);
            importance(split) = eff;
            work.push_back({split, it.last, eff});
            work.push_back({it.first, split, eff});
        }
    }
    return importance;
}

} // namespace specfid
