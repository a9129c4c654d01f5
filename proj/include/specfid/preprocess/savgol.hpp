#pragma once

#include <Eigen/Dense>

#include <string>

#include "specfid/core/curve.hpp"

namespace specfid {

/// Savitzky–Golay smoothing parameters. window counts samples and must be odd.
struct SgConfig {
    int window = 11;
    int poly_order = 3;

    bool valid() const { return window >= 3 && window % 2 == 1 && poly_order >= 0 && poly_order < window; }
};

inline void validate(const SgConfig& cfg)
{
    if (!cfg.valid())
        throw Error(ErrorCode::InvalidConfig, "Savitzky-Golay needs odd window >= 3 and 0 <= order < window (got window=" +
                                                  std::to_string(cfg.window) + ", order=" + std::to_string(cfg.poly_order) + ")");
}

/// Central-point weights of the windowed least-squares polynomial fit.
///
/// Solves the normal equations on a Vandermonde matrix over the abscissae
/// j/m, j = -m..m (m = window/2); the rescaling keeps the Gram matrix well
/// conditioned for larger windows without changing the weights.
template <typename Scalar = double>
Vector<Scalar> sg_coefficients(int window, int poly_order)
{
    validate(SgConfig{window, poly_order});
    const int m = window / 2;
    const int cols = poly_order + 1;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vander(window, cols);
    for (int r = 0; r < window; ++r) {
        const Scalar t = Scalar(r - m) / Scalar(m);
        Scalar p = 1;
        for (int c = 0; c < cols; ++c) {
            vander(r, c) = p;
            p *= t;
        }
    }
    Vector<Scalar> e0 = Vector<Scalar>::Zero(cols);
    e0(0) = 1;
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> gram = vander.transpose() * vander;
    return vander * gram.ldlt().solve(e0);
}

/// Reflect-without-edge index into [0, n).
inline Eigen::Index mirror_index(Eigen::Index i, Eigen::Index n)
{
    if (n == 1)
        return 0;
    const Eigen::Index period = 2 * (n - 1);
    i %= period;
    if (i < 0)
        i += period;
    return i < n ? i : period - i;
}

/// Filters the y column by index (uniform-grid assumption); x is untouched.
template <typename Scalar>
BasicCurve<Scalar> sg_smooth(const BasicCurve<Scalar>& curve, const SgConfig& cfg = {})
{
    validate(cfg);
    const Eigen::Index n = curve.size();
    if (n < cfg.window)
        throw Error(ErrorCode::CurveTooShort, "curve has " + std::to_string(n) + " points, window is " + std::to_string(cfg.window));
    const Vector<Scalar> w = sg_coefficients<Scalar>(cfg.window, cfg.poly_order);
    const Eigen::Index m = cfg.window / 2;

    PointMatrix<Scalar> out = curve.points;
    const auto y = curve.points.col(1);
    for (Eigen::Index i = 0; i < n; ++i) {
        Scalar acc = 0;
        if (i >= m && i + m < n) {
            acc = w.dot(y.segment(i - m, cfg.window));
        } else {
            for (Eigen::Index k = -m; k <= m; ++k)
                acc += w(k + m) * y(mirror_index(i + k, n));
        }
        out(i, 1) = acc;
    }
    return curve.with_points(std::move(out));
}

} // namespace specfid
