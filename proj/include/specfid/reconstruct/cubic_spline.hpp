#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "specfid/core/curve.hpp"

namespace specfid {

/// Piecewise cubic y = a + bΔ + cΔ² + dΔ³ with Δ = x − knots[i] on [knots[i], knots[i+1]].
template <typename Scalar>
struct CubicSpline {
    Vector<Scalar> knots;
    Vector<Scalar> a, b, c, d; // one entry per interval
    Scalar y_last = 0;          // value at the final knot, returned exactly

    Eigen::Index intervals() const { return a.size(); }
    Scalar x_min() const { return knots(0); }
    Scalar x_max() const { return knots(knots.size() - 1); }

    Eigen::Index interval_of(Scalar x) const
    {
        const auto* begin = knots.data();
        const auto* end = knots.data() + knots.size();
        auto it = std::upper_bound(begin, end, x);
        Eigen::Index i = static_cast<Eigen::Index>(it - begin) - 1;
        return std::clamp<Eigen::Index>(i, 0, intervals() - 1);
    }

    Scalar operator()(Scalar x) const
    {
        if (x == x_max())
            return y_last;
        const Eigen::Index i = interval_of(x);
        return eval(i, x - knots(i));
    }

    /// Value of interval i's polynomial at local offset dx.
    Scalar eval(Eigen::Index i, Scalar dx) const { return a(i) + dx * (b(i) + dx * (c(i) + dx * d(i))); }
    Scalar eval_d1(Eigen::Index i, Scalar dx) const { return b(i) + dx * (Scalar(2) * c(i) + Scalar(3) * dx * d(i)); }
    Scalar eval_d2(Eigen::Index i, Scalar dx) const { return Scalar(2) * c(i) + Scalar(6) * dx * d(i); }
};

/// Natural cubic spline through the points of an x-canonical curve. Two
/// points give the connecting line. The second-derivative system is
/// tridiagonal and strictly diagonally dominant for increasing knots, so the
/// Thomas sweep runs without pivoting.
template <typename Scalar>
CubicSpline<Scalar> spline_fit(const BasicCurve<Scalar>& sampled)
{
    const Eigen::Index n = sampled.size();
    if (n < 2)
        throw Error(ErrorCode::TooFewPoints, "spline needs at least 2 points, got " + std::to_string(n));
    if (!is_strictly_increasing_x(sampled))
        throw Error(ErrorCode::NonMonotonicX, "spline knots must be strictly increasing (canonicalize first)");

    const Vector<Scalar> x = sampled.x();
    const Vector<Scalar> y = sampled.y();
    const Vector<Scalar> h = x.tail(n - 1) - x.head(n - 1);

    // M = second derivatives at knots; natural ends M(0) = M(n-1) = 0.
    Vector<Scalar> m = Vector<Scalar>::Zero(n);
    const Eigen::Index inner = n - 2;
    if (inner > 0) {
        Vector<Scalar> diag(inner), upper(inner), rhs(inner);
        for (Eigen::Index k = 0; k < inner; ++k) {
            const Eigen::Index i = k + 1;
            diag(k) = Scalar(2) * (h(i - 1) + h(i));
            upper(k) = h(i);
            rhs(k) = Scalar(6) * ((y(i + 1) - y(i)) / h(i) - (y(i) - y(i - 1)) / h(i - 1));
        }
        // forward elimination; the sub-diagonal entry of row k is h(k)
        for (Eigen::Index k = 1; k < inner; ++k) {
            const Scalar w = h(k) / diag(k - 1);
            diag(k) -= w * upper(k - 1);
            rhs(k) -= w * rhs(k - 1);
        }
        m(inner) = rhs(inner - 1) / diag(inner - 1);
        for (Eigen::Index k = inner - 2; k >= 0; --k)
            m(k + 1) = (rhs(k) - upper(k) * m(k + 2)) / diag(k);
    }

    CubicSpline<Scalar> s;
    s.knots = x;
    s.a = y.head(n - 1);
    s.c = m.head(n - 1) / Scalar(2);
    s.d = (m.tail(n - 1) - m.head(n - 1)).cwiseQuotient(Scalar(6) * h);
    s.y_last = y(n - 1);
    s.b.resize(n - 1);
    for (Eigen::Index i = 0; i < n - 1; ++i)
        s.b(i) = (y(i + 1) - y(i)) / h(i) - h(i) * (Scalar(2) * m(i) + m(i + 1)) / Scalar(6);
    return s;
}

/// Shape-preserving piecewise cubic Hermite fit (Fritsch–Carlson slopes with
/// the weighted harmonic mean). Only C¹, but never overshoots the data between
/// knots, which is what impulse-like (stick) data needs: a natural spline
/// through a one-sample spike rings by several times the spike height.
template <typename Scalar>
CubicSpline<Scalar> monotone_fit(const BasicCurve<Scalar>& sampled)
{
    const Eigen::Index n = sampled.size();
    if (n < 2)
        throw Error(ErrorCode::TooFewPoints, "spline needs at least 2 points, got " + std::to_string(n));
    if (!is_strictly_increasing_x(sampled))
        throw Error(ErrorCode::NonMonotonicX, "spline knots must be strictly increasing (canonicalize first)");

    const Vector<Scalar> x = sampled.x();
    const Vector<Scalar> y = sampled.y();
    const Vector<Scalar> h = x.tail(n - 1) - x.head(n - 1);
    const Vector<Scalar> delta = (y.tail(n - 1) - y.head(n - 1)).cwiseQuotient(h);
    Vector<Scalar> slope = Vector<Scalar>::Zero(n);
    auto sign = [](Scalar v) { return (v > Scalar(0)) - (v < Scalar(0)); };

    if (n == 2) {
        slope.setConstant(delta(0));
    } else {
        for (Eigen::Index k = 1; k < n - 1; ++k) {
            if (sign(delta(k - 1)) * sign(delta(k)) <= 0)
                continue;
            const Scalar w1 = Scalar(2) * h(k) + h(k - 1);
            const Scalar w2 = h(k) + Scalar(2) * h(k - 1);
            slope(k) = (w1 + w2) / (w1 / delta(k - 1) + w2 / delta(k));
        }
        auto end_slope = [&](Scalar h0, Scalar h1, Scalar d0, Scalar d1) {
            Scalar s = ((Scalar(2) * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
            if (sign(s) != sign(d0))
                s = 0;
            else if (sign(d0) != sign(d1) && std::abs(s) > std::abs(Scalar(3) * d0))
                s = Scalar(3) * d0;
            return s;
        };
        slope(0) = end_slope(h(0), h(1), delta(0), delta(1));
        slope(n - 1) = end_slope(h(n - 2), h(n - 3), delta(n - 2), delta(n - 3));
    }

    CubicSpline<Scalar> s;
    s.knots = x;
    s.a = y.head(n - 1);
    s.b = slope.head(n - 1);
    s.c.resize(n - 1);
    s.d.resize(n - 1);
    for (Eigen::Index i = 0; i < n - 1; ++i) {
        s.c(i) = (Scalar(3) * delta(i) - Scalar(2) * slope(i) - slope(i + 1)) / h(i);
        s.d(i) = (slope(i) + slope(i + 1) - Scalar(2) * delta(i)) / (h(i) * h(i));
    }
    s.y_last = y(n - 1);
    return s;
}

/// Evaluates the spline on a grid that must lie inside [first knot, last knot].
template <typename Scalar, typename Derived>
BasicCurve<Scalar> resample_dense(const CubicSpline<Scalar>& spline, const Eigen::MatrixBase<Derived>& x_grid)
{
    std::vector<Scalar> bad;
    for (Eigen::Index i = 0; i < x_grid.size(); ++i)
        if (!(x_grid(i) >= spline.x_min() && x_grid(i) <= spline.x_max()))
            bad.push_back(x_grid(i));
    if (!bad.empty()) {
        std::ostringstream msg;
        msg << bad.size() << " grid value(s) outside [" << spline.x_min() << ", " << spline.x_max() << "]:";
        for (std::size_t k = 0; k < std::min<std::size_t>(bad.size(), 8); ++k)
            msg << ' ' << bad[k];
        if (bad.size() > 8)
            msg << " ...";
        throw Error(ErrorCode::OutOfDomain, msg.str());
    }
    PointMatrix<Scalar> out(x_grid.size(), 2);
    for (Eigen::Index i = 0; i < x_grid.size(); ++i) {
        out(i, 0) = x_grid(i);
        out(i, 1) = spline(x_grid(i));
    }
    BasicCurve<Scalar> dense(std::move(out));
    if (!is_strictly_increasing_x(dense))
        return canonicalize(dense).curve;
    return dense;
}

/// K evenly spaced x values covering the spline's knot range.
template <typename Scalar>
Vector<Scalar> uniform_grid(const CubicSpline<Scalar>& spline, Eigen::Index count)
{
    if (count < 2)
        throw Error(ErrorCode::InvalidConfig, "uniform grid needs at least 2 points");
    Vector<Scalar> g = Vector<Scalar>::LinSpaced(count, spline.x_min(), spline.x_max());
    g(count - 1) = spline.x_max();
    return g;
}

} // namespace specfid
