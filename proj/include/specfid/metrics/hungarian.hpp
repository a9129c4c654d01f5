#pragma once

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <vector>

#include "specfid/core/error.hpp"

namespace specfid {

struct LinePair {
    Eigen::Index pred = 0;
    Eigen::Index truth = 0;
    double cost = 0;
};

/// One-to-one partial matching between predicted lines (rows) and truth lines (columns).
struct LineAssignment {
    std::vector<LinePair> pairs;
    std::vector<Eigen::Index> unmatched_pred;
    std::vector<Eigen::Index> unmatched_truth;

    double total_cost() const
    {
        double t = 0;
        for (const auto& p : pairs)
            t += p.cost;
        return t;
    }
};

/// Minimum-cost assignment (Kuhn–Munkres with row potentials, O(k³)).
///
/// Rectangular inputs are padded to a k×k square, k = max(n, m), with a
/// constant cost above every real entry; padded matches are dropped, leaving
/// a matching of size min(n, m). Pairs are listed in ascending row order.
template <typename Derived>
LineAssignment hungarian_assign(const Eigen::MatrixBase<Derived>& cost)
{
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = cost.rows(), m = cost.cols();
    if (n < 1 || m < 1)
        throw Error(ErrorCode::InvalidInput, "assignment needs a non-empty cost matrix");
    if (!cost.allFinite())
        throw Error(ErrorCode::NonFiniteCost, "cost matrix contains NaN or infinity");

    const Eigen::Index k = std::max(n, m);
    const Scalar pad = cost.cwiseAbs().maxCoeff() + Scalar(1);
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> sq = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Constant(k, k, pad);
    sq.topLeftCorner(n, m) = cost;

    // 1-based potentials formulation; column 0 is the virtual start.
    const Scalar inf = std::numeric_limits<Scalar>::infinity();
    std::vector<Scalar> u(static_cast<std::size_t>(k + 1), 0), v(static_cast<std::size_t>(k + 1), 0);
    std::vector<Eigen::Index> match_col(static_cast<std::size_t>(k + 1), 0), way(static_cast<std::size_t>(k + 1), 0);
    for (Eigen::Index row = 1; row <= k; ++row) {
        match_col[0] = row;
        Eigen::Index j0 = 0;
        std::vector<Scalar> minv(static_cast<std::size_t>(k + 1), inf);
        std::vector<char> used(static_cast<std::size_t>(k + 1), 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const Eigen::Index i0 = match_col[static_cast<std::size_t>(j0)];
            Scalar delta = inf;
            Eigen::Index j1 = 0;
            for (Eigen::Index j = 1; j <= k; ++j) {
                const auto ju = static_cast<std::size_t>(j);
                if (used[ju])
                    continue;
                const Scalar cur = sq(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[ju];
                if (cur < minv[ju]) {
                    minv[ju] = cur;
                    way[ju] = j0;
                }
                if (minv[ju] < delta) {
                    delta = minv[ju];
                    j1 = j;
                }
            }
            for (Eigen::Index j = 0; j <= k; ++j) {
                const auto ju = static_cast<std::size_t>(j);
                if (used[ju]) {
                    u[static_cast<std::size_t>(match_col[ju])] += delta;
                    v[ju] -= delta;
                } else {
                    minv[ju] -= delta;
                }
            }
            j0 = j1;
        } while (match_col[static_cast<std::size_t>(j0)] != 0);
        do {
            const Eigen::Index j1 = way[static_cast<std::size_t>(j0)];
            match_col[static_cast<std::size_t>(j0)] = match_col[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<Eigen::Index> row_to_col(static_cast<std::size_t>(k), -1);
    for (Eigen::Index j = 1; j <= k; ++j)
        row_to_col[static_cast<std::size_t>(match_col[static_cast<std::size_t>(j)] - 1)] = j - 1;

    LineAssignment out;
    std::vector<char> truth_used(static_cast<std::size_t>(m), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index j = row_to_col[static_cast<std::size_t>(i)];
        if (j >= 0 && j < m) {
            out.pairs.push_back({i, j, static_cast<double>(cost(i, j))});
            truth_used[static_cast<std::size_t>(j)] = 1;
        } else {
            out.unmatched_pred.push_back(i);
        }
    }
    for (Eigen::Index j = 0; j < m; ++j)
        if (!truth_used[static_cast<std::size_t>(j)])
            out.unmatched_truth.push_back(j);
    return out;
}

} // namespace specfid
