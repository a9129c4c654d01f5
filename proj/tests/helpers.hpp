#pragma once

#include <initializer_list>
#include <random>
#include <utility>
#include <vector>

#include "oracles.hpp"
#include "specfid/core/curve.hpp"

namespace testutil {

inline specfid::SpectralCurve curve(std::initializer_list<std::pair<double, double>> pts, std::string name = {})
{
    specfid::PointMatrix<double> m(static_cast<Eigen::Index>(pts.size()), 2);
    Eigen::Index i = 0;
    for (const auto& [x, y] : pts) {
        m(i, 0) = x;
        m(i, 1) = y;
        ++i;
    }
    return specfid::SpectralCurve(std::move(m), std::move(name));
}

template <typename Fn>
specfid::SpectralCurve sampled_fn(Eigen::Index n, double lo, double hi, Fn&& f)
{
    specfid::PointMatrix<double> m(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = lo + (hi - lo) * double(i) / double(n - 1);
        m(i, 0) = x;
        m(i, 1) = f(x);
    }
    return specfid::SpectralCurve(std::move(m));
}

inline std::vector<oracle::Pt> to_pts(const specfid::PointMatrix<double>& m)
{
    std::vector<oracle::Pt> out;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        out.push_back({m(i, 0), m(i, 1)});
    return out;
}

/// Random walk in the unit square with strictly increasing x.
inline specfid::PointMatrix<double> random_polyline(std::mt19937_64& rng, Eigen::Index n)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    specfid::PointMatrix<double> m(n, 2);
    double y = u(rng);
    for (Eigen::Index i = 0; i < n; ++i) {
        m(i, 0) = n > 1 ? double(i) / double(n - 1) : 0.0;
        y = std::clamp(y + (u(rng) - 0.5) * 0.2, 0.0, 1.0);
        m(i, 1) = y;
    }
    return m;
}

inline specfid::PointMatrix<double> random_cloud(std::mt19937_64& rng, Eigen::Index n)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    specfid::PointMatrix<double> m(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        m(i, 0) = u(rng);
        m(i, 1) = u(rng);
    }
    return m;
}

} // namespace testutil
