#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "specfid/core/error.hpp"

namespace specfid {

/// N×2 dense point storage: column 0 is x, column 1 is y.
template <typename Scalar>
using PointMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, 2>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Sorted, duplicate-free list of row indices into a curve.
using IndexSet = std::vector<Eigen::Index>;

template <typename Scalar>
struct BasicCurve {
    PointMatrix<Scalar> points;
    std::string name;
    std::string x_label;
    std::string y_label;

    BasicCurve() = default;
    explicit BasicCurve(PointMatrix<Scalar> pts, std::string curve_name = {})
        : points(std::move(pts)), name(std::move(curve_name))
    {
    }

    Eigen::Index size() const { return points.rows(); }
    bool empty() const { return points.rows() == 0; }

    auto x() const { return points.col(0); }
    auto y() const { return points.col(1); }
    auto x() { return points.col(0); }
    auto y() { return points.col(1); }

    /// Same metadata, different points.
    BasicCurve with_points(PointMatrix<Scalar> pts) const
    {
        BasicCurve out(std::move(pts), name);
        out.x_label = x_label;
        out.y_label = y_label;
        return out;
    }

    /// Rows at the given indices, in the given order.
    BasicCurve select(const IndexSet& idx) const
    {
        PointMatrix<Scalar> pts(static_cast<Eigen::Index>(idx.size()), 2);
        for (std::size_t k = 0; k < idx.size(); ++k)
            pts.row(static_cast<Eigen::Index>(k)) = points.row(idx[k]);
        return with_points(std::move(pts));
    }
};

using SpectralCurve = BasicCurve<double>;

template <typename Scalar>
struct Canonicalized {
    BasicCurve<Scalar> curve;
    Eigen::Index dropped_nonfinite = 0;
    Eigen::Index collapsed_duplicates = 0;
};

/// Sorts by x, averages y over exactly repeated x, and drops rows with a
/// non-finite coordinate. Throws EmptyCurve when nothing finite remains.
template <typename Scalar>
Canonicalized<Scalar> canonicalize(const BasicCurve<Scalar>& curve)
{
    Canonicalized<Scalar> out;
    std::vector<Eigen::Index> order;
    order.reserve(static_cast<std::size_t>(curve.size()));
    for (Eigen::Index i = 0; i < curve.size(); ++i) {
        if (std::isfinite(curve.points(i, 0)) && std::isfinite(curve.points(i, 1)))
            order.push_back(i);
        else
            ++out.dropped_nonfinite;
    }
    if (order.empty())
        throw Error(ErrorCode::EmptyCurve, "no finite points in curve '" + curve.name + "'");

    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return curve.points(a, 0) < curve.points(b, 0);
    });

    PointMatrix<Scalar> pts(static_cast<Eigen::Index>(order.size()), 2);
    Eigen::Index n = 0;
    std::size_t k = 0;
    while (k < order.size()) {
        const Scalar x = curve.points(order[k], 0);
        Scalar sum = 0;
        std::size_t run = 0;
        while (k + run < order.size() && curve.points(order[k + run], 0) == x) {
            sum += curve.points(order[k + run], 1);
            ++run;
        }
        pts(n, 0) = x;
        pts(n, 1) = sum / static_cast<Scalar>(run);
        out.collapsed_duplicates += static_cast<Eigen::Index>(run - 1);
        ++n;
        k += run;
    }
    pts.conservativeResize(n, 2);
    out.curve = curve.with_points(std::move(pts));
    return out;
}

template <typename Scalar>
bool is_strictly_increasing_x(const BasicCurve<Scalar>& curve)
{
    for (Eigen::Index i = 1; i < curve.size(); ++i)
        if (!(curve.points(i, 0) > curve.points(i - 1, 0)))
            return false;
    return true;
}

/// Affine map u = (v - offset) * scale per axis.
template <typename Scalar>
struct AxisNormalization {
    Scalar x_offset = 0;
    Scalar x_scale = 1;
    Scalar y_offset = 0;
    Scalar y_scale = 1;

    static AxisNormalization identity() { return {}; }

    template <typename Derived>
    PointMatrix<Scalar> apply(const Eigen::MatrixBase<Derived>& pts) const
    {
        PointMatrix<Scalar> out(pts.rows(), 2);
        out.col(0) = (pts.col(0).array() - x_offset) * x_scale;
        out.col(1) = (pts.col(1).array() - y_offset) * y_scale;
        return out;
    }

    template <typename Derived>
    PointMatrix<Scalar> invert(const Eigen::MatrixBase<Derived>& pts) const
    {
        PointMatrix<Scalar> out(pts.rows(), 2);
        out.col(0) = pts.col(0).array() / x_scale + x_offset;
        out.col(1) = pts.col(1).array() / y_scale + y_offset;
        return out;
    }

    BasicCurve<Scalar> apply(const BasicCurve<Scalar>& c) const { return c.with_points(apply(c.points)); }
    BasicCurve<Scalar> invert(const BasicCurve<Scalar>& c) const { return c.with_points(invert(c.points)); }
};

namespace detail {

template <typename Scalar>
void axis_map(Scalar lo, Scalar hi, Scalar& offset, Scalar& scale)
{
    if (hi > lo) {
        offset = lo;
        scale = Scalar(1) / (hi - lo);
    } else {
        // degenerate extent: unit scale, value lands on 0.5
        scale = Scalar(1);
        offset = lo - Scalar(0.5);
    }
}

} // namespace detail

/// Affine map sending the joint bounding box of both point sets onto the unit square.
template <typename DerivedA, typename DerivedB>
AxisNormalization<typename DerivedA::Scalar> fit_unit_square(const Eigen::MatrixBase<DerivedA>& a,
                                                             const Eigen::MatrixBase<DerivedB>& b)
{
    using Scalar = typename DerivedA::Scalar;
    if (a.rows() == 0 || b.rows() == 0)
        throw Error(ErrorCode::EmptySet, "fit_unit_square needs non-empty inputs");
    const Scalar x_lo = std::min(a.col(0).minCoeff(), b.col(0).minCoeff());
    const Scalar x_hi = std::max(a.col(0).maxCoeff(), b.col(0).maxCoeff());
    const Scalar y_lo = std::min(a.col(1).minCoeff(), b.col(1).minCoeff());
    const Scalar y_hi = std::max(a.col(1).maxCoeff(), b.col(1).maxCoeff());
    AxisNormalization<Scalar> n;
    detail::axis_map(x_lo, x_hi, n.x_offset, n.x_scale);
    detail::axis_map(y_lo, y_hi, n.y_offset, n.y_scale);
    return n;
}

template <typename Scalar>
AxisNormalization<Scalar> fit_unit_square(const BasicCurve<Scalar>& a, const BasicCurve<Scalar>& b)
{
    return fit_unit_square(a.points, b.points);
}

/// Bounding box over many point sets at once (used for multi-line subplots).
template <typename Scalar>
AxisNormalization<Scalar> fit_unit_square(const std::vector<const PointMatrix<Scalar>*>& sets)
{
    Scalar x_lo = std::numeric_limits<Scalar>::infinity(), x_hi = -x_lo;
    Scalar y_lo = x_lo, y_hi = -x_lo;
    for (const auto* s : sets) {
        if (s->rows() == 0)
            continue;
        x_lo = std::min(x_lo, s->col(0).minCoeff());
        x_hi = std::max(x_hi, s->col(0).maxCoeff());
        y_lo = std::min(y_lo, s->col(1).minCoeff());
        y_hi = std::max(y_hi, s->col(1).maxCoeff());
    }
    if (!(x_hi >= x_lo))
        throw Error(ErrorCode::EmptySet, "fit_unit_square needs at least one point");
    AxisNormalization<Scalar> n;
    detail::axis_map(x_lo, x_hi, n.x_offset, n.x_scale);
    detail::axis_map(y_lo, y_hi, n.y_offset, n.y_scale);
    return n;
}

} // namespace specfid
