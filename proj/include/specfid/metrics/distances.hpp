#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string_view>
#include <vector>

#include "specfid/core/curve.hpp"

namespace specfid {

enum class MetricKind { Chamfer, Hausdorff, Wasserstein };

constexpr std::string_view to_string(MetricKind k) noexcept
{
    switch (k) {
    case MetricKind::Chamfer: return "cd";
    case MetricKind::Hausdorff: return "hd";
    case MetricKind::Wasserstein: return "wd";
    }
    return "?";
}

/// Score denominator convention. Dimensional divides squared distances by the
/// squared diameter and unsquared ones by the diameter; StrictSquared always
/// divides by the squared diameter.
enum class ScoreMode { Dimensional, StrictSquared };

enum class NnMethod { Auto, Exhaustive, Grid };

/// Above this many point pairs the grid accelerator replaces the exhaustive scan.
inline constexpr double kExhaustivePairLimit = 4096.0 * 4096.0;

namespace detail {

template <typename DerivedA, typename DerivedB>
Vector<typename DerivedA::Scalar> nn_sq_exhaustive(const Eigen::MatrixBase<DerivedA>& from,
                                                  const Eigen::MatrixBase<DerivedB>& to)
{
    using Scalar = typename DerivedA::Scalar;
    const Eigen::Array<Scalar, Eigen::Dynamic, 1> tx = to.col(0).array();
    const Eigen::Array<Scalar, Eigen::Dynamic, 1> ty = to.col(1).array();
    Vector<Scalar> out(from.rows());
    for (Eigen::Index i = 0; i < from.rows(); ++i) {
        const Scalar qx = from(i, 0), qy = from(i, 1);
        out(i) = ((tx - qx).square() + (ty - qy).square()).minCoeff();
    }
    return out;
}

/// Uniform bucket grid over the target set; queries expand ring by ring until
/// no unvisited cell can hold a closer point.
template <typename Scalar>
class BucketGrid {
public:
    template <typename Derived>
    explicit BucketGrid(const Eigen::MatrixBase<Derived>& pts) : pts_(pts)
    {
        const Eigen::Index n = pts_.rows();
        x0_ = pts_.col(0).minCoeff();
        y0_ = pts_.col(1).minCoeff();
        const Scalar w = pts_.col(0).maxCoeff() - x0_;
        const Scalar h = pts_.col(1).maxCoeff() - y0_;
        const Scalar extent = std::max(w, h);
        // about two points per cell for a set spread over its bounding box
        Scalar cell = std::sqrt(std::max(w * h, extent * extent / Scalar(n)) * Scalar(2) / Scalar(n));
        if (!(cell > Scalar(0)))
            cell = Scalar(1);
        cell_ = cell;
        nx_ = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(w / cell_) + 1);
        ny_ = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(h / cell_) + 1);
        start_.assign(static_cast<std::size_t>(nx_ * ny_ + 1), 0);
        std::vector<Eigen::Index> cell_of(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            cell_of[static_cast<std::size_t>(i)] = cell_index(cx(pts_(i, 0)), cy(pts_(i, 1)));
            ++start_[static_cast<std::size_t>(cell_of[static_cast<std::size_t>(i)] + 1)];
        }
        for (std::size_t c = 1; c < start_.size(); ++c)
            start_[c] += start_[c - 1];
        members_.resize(static_cast<std::size_t>(n));
        std::vector<Eigen::Index> fill(start_.begin(), start_.end() - 1);
        for (Eigen::Index i = 0; i < n; ++i)
            members_[static_cast<std::size_t>(fill[static_cast<std::size_t>(cell_of[static_cast<std::size_t>(i)])]++)] = i;
    }

    Scalar nearest_sq(Scalar qx, Scalar qy) const
    {
        const Eigen::Index ix = cx(qx), iy = cy(qy);
        Scalar best = std::numeric_limits<Scalar>::infinity();
        const Eigen::Index max_ring = std::max({ix, nx_ - 1 - ix, iy, ny_ - 1 - iy});
        for (Eigen::Index r = 0; r <= max_ring; ++r) {
            for (Eigen::Index gy = iy - r; gy <= iy + r; ++gy) {
                if (gy < 0 || gy >= ny_)
                    continue;
                const bool edge_row = (gy == iy - r || gy == iy + r);
                for (Eigen::Index gx = ix - r; gx <= ix + r; gx += (edge_row ? 1 : 2 * r)) {
                    if (gx >= 0 && gx < nx_)
                        scan_cell(cell_index(gx, gy), qx, qy, best);
                    if (r == 0)
                        break;
                }
            }
            const Scalar reach = Scalar(r) * cell_;
            if (best <= reach * reach)
                break;
        }
        return best;
    }

private:
    Eigen::Index cx(Scalar x) const
    {
        return std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor((x - x0_) / cell_)), 0, nx_ - 1);
    }
    Eigen::Index cy(Scalar y) const
    {
        return std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor((y - y0_) / cell_)), 0, ny_ - 1);
    }
    Eigen::Index cell_index(Eigen::Index gx, Eigen::Index gy) const { return gy * nx_ + gx; }

    void scan_cell(Eigen::Index c, Scalar qx, Scalar qy, Scalar& best) const
    {
        for (Eigen::Index k = start_[static_cast<std::size_t>(c)]; k < start_[static_cast<std::size_t>(c + 1)]; ++k) {
            const Eigen::Index i = members_[static_cast<std::size_t>(k)];
            const Scalar dx = pts_(i, 0) - qx;
            const Scalar dy = pts_(i, 1) - qy;
            best = std::min(best, dx * dx + dy * dy);
        }
    }

    PointMatrix<Scalar> pts_;
    Scalar x0_ = 0, y0_ = 0, cell_ = 1;
    Eigen::Index nx_ = 1, ny_ = 1;
    std::vector<Eigen::Index> start_;
    std::vector<Eigen::Index> members_;
};

} // namespace detail

/// Squared distance from each row of `from` to its nearest row of `to`.
template <typename DerivedA, typename DerivedB>
Vector<typename DerivedA::Scalar> nearest_sq_distances(const Eigen::MatrixBase<DerivedA>& from,
                                                       const Eigen::MatrixBase<DerivedB>& to,
                                                       NnMethod method = NnMethod::Auto)
{
    using Scalar = typename DerivedA::Scalar;
    if (from.rows() == 0 || to.rows() == 0)
        throw Error(ErrorCode::EmptySet, "nearest-neighbour query on an empty point set");
    if (method == NnMethod::Auto)
        method = double(from.rows()) * double(to.rows()) > kExhaustivePairLimit ? NnMethod::Grid : NnMethod::Exhaustive;
    if (method == NnMethod::Exhaustive)
        return detail::nn_sq_exhaustive(from, to);
    const detail::BucketGrid<Scalar> grid(to);
    Vector<Scalar> out(from.rows());
    for (Eigen::Index i = 0; i < from.rows(); ++i)
        out(i) = grid.nearest_sq(from(i, 0), from(i, 1));
    return out;
}

/// Mean squared nearest-neighbour distance, summed over both directions.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar chamfer(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                                  NnMethod method = NnMethod::Auto)
{
    return nearest_sq_distances(a, b, method).mean() + nearest_sq_distances(b, a, method).mean();
}

/// Symmetric Hausdorff distance (unsquared).
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar hausdorff(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                                    NnMethod method = NnMethod::Auto)
{
    using std::sqrt;
    return sqrt(std::max(nearest_sq_distances(a, b, method).maxCoeff(), nearest_sq_distances(b, a, method).maxCoeff()));
}

/// Chamfer and Hausdorff from one pair of nearest-neighbour sweeps.
template <typename Scalar>
struct CloudDistances {
    Scalar chamfer = 0;
    Scalar hausdorff = 0;
};

template <typename DerivedA, typename DerivedB>
CloudDistances<typename DerivedA::Scalar> cloud_distances(const Eigen::MatrixBase<DerivedA>& a,
                                                          const Eigen::MatrixBase<DerivedB>& b,
                                                          NnMethod method = NnMethod::Auto)
{
    const auto ab = nearest_sq_distances(a, b, method);
    const auto ba = nearest_sq_distances(b, a, method);
    using std::sqrt;
    return {ab.mean() + ba.mean(), sqrt(std::max(ab.maxCoeff(), ba.maxCoeff()))};
}

/// Mean Euclidean distance between index-matched rows of equal-length sets.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar wasserstein_paired(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b)
{
    if (a.rows() != b.rows())
        throw Error(ErrorCode::LengthMismatch, "paired Wasserstein needs equal lengths (" + std::to_string(a.rows()) +
                                                   " vs " + std::to_string(b.rows()) + ")");
    if (a.rows() == 0)
        throw Error(ErrorCode::EmptySet, "paired Wasserstein on empty sets");
    return (a - b).rowwise().norm().mean();
}

/// Convex hull (counter-clockwise, no collinear points) by monotone chain.
template <typename Derived>
PointMatrix<typename Derived::Scalar> convex_hull(const Eigen::MatrixBase<Derived>& pts)
{
    using Scalar = typename Derived::Scalar;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(pts.rows()));
    for (Eigen::Index i = 0; i < pts.rows(); ++i)
        order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return pts(a, 0) < pts(b, 0) || (pts(a, 0) == pts(b, 0) && pts(a, 1) < pts(b, 1));
    });
    auto cross = [&](Eigen::Index o, Eigen::Index a, Eigen::Index b) {
        return (pts(a, 0) - pts(o, 0)) * (pts(b, 1) - pts(o, 1)) - (pts(a, 1) - pts(o, 1)) * (pts(b, 0) - pts(o, 0));
    };
    std::vector<Eigen::Index> hull;
    if (order.size() < 3) {
        hull = order;
    } else {
        for (int pass = 0; pass < 2; ++pass) {
            const std::size_t base = hull.size();
            for (Eigen::Index idx : order) {
                while (hull.size() >= base + 2 && cross(hull[hull.size() - 2], hull.back(), idx) <= Scalar(0))
                    hull.pop_back();
                hull.push_back(idx);
            }
            hull.pop_back();
            std::reverse(order.begin(), order.end());
        }
    }
    PointMatrix<Scalar> out(static_cast<Eigen::Index>(hull.size()), 2);
    for (std::size_t k = 0; k < hull.size(); ++k)
        out.row(static_cast<Eigen::Index>(k)) = pts.row(hull[k]);
    return out;
}

/// max ‖p − q‖² over all pairs; the farthest pair always lies on the hull.
template <typename Derived>
typename Derived::Scalar squared_diameter(const Eigen::MatrixBase<Derived>& pts)
{
    using Scalar = typename Derived::Scalar;
    if (pts.rows() == 0)
        throw Error(ErrorCode::EmptySet, "diameter of an empty set");
    const PointMatrix<Scalar> hull = convex_hull(pts);
    Scalar best = 0;
    for (Eigen::Index i = 0; i < hull.rows(); ++i)
        for (Eigen::Index j = i + 1; j < hull.rows(); ++j)
            best = std::max(best, (hull.row(i) - hull.row(j)).squaredNorm());
    return best;
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar squared_diameter(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b)
{
    PointMatrix<typename DerivedA::Scalar> u(a.rows() + b.rows(), 2);
    u << a, b;
    return squared_diameter(u);
}

/// 1 − d / D with D the union diameter (squared for Chamfer, or always under
/// StrictSquared). A zero diameter means identical singletons: the score is 1
/// and `degenerate`, when given, is set.
template <typename Scalar>
Scalar normalized_score(Scalar d, Scalar diameter_sq, MetricKind kind, ScoreMode mode = ScoreMode::Dimensional,
                        bool* degenerate = nullptr)
{
    if (degenerate)
        *degenerate = false;
    if (!(diameter_sq > Scalar(0))) {
        if (degenerate)
            *degenerate = true;
        return Scalar(1);
    }
    using std::sqrt;
    const bool squared = kind == MetricKind::Chamfer || mode == ScoreMode::StrictSquared;
    return Scalar(1) - d / (squared ? diameter_sq : sqrt(diameter_sq));
}

} // namespace specfid
