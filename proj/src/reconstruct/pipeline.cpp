#include "specfid/reconstruct/pipeline.hpp"

#include <algorithm>

namespace specfid {

namespace {

// Each grid x takes the sample value when it is a sample x, otherwise the
// lower of the two bracketing samples.
SpectralCurve stick_resample(const SpectralCurve& knots, const Vector<double>& x_grid)
{
    const Eigen::Index n = knots.size();
    const double* xs = knots.points.col(0).data();
    PointMatrix<double> pts(x_grid.size(), 2);
    for (Eigen::Index i = 0; i < x_grid.size(); ++i) {
        const double q = x_grid(i);
        pts(i, 0) = q;
        const auto hi = static_cast<Eigen::Index>(std::lower_bound(xs, xs + n, q) - xs);
        if (hi < n && xs[hi] == q)
            pts(i, 1) = knots.points(hi, 1);
        else if (hi == 0)
            pts(i, 1) = knots.points(0, 1);
        else if (hi == n)
            pts(i, 1) = knots.points(n - 1, 1);
        else
            pts(i, 1) = std::min(knots.points(hi - 1, 1), knots.points(hi, 1));
    }
    return knots.with_points(std::move(pts));
}

} // namespace

SpectralCurve reconstruct_on_grid(const SpectralCurve& sampled, const Vector<double>& x_grid, Interpolant kind)
{
    const auto canon = canonicalize(sampled).curve;
    if (canon.size() == 1) {
        PointMatrix<double> pts(x_grid.size(), 2);
        pts.col(0) = x_grid;
        pts.col(1).setConstant(canon.points(0, 1));
        return canon.with_points(std::move(pts));
    }
    if (kind == Interpolant::Stick)
        return stick_resample(canon, x_grid);
    const auto spline = kind == Interpolant::Monotone ? monotone_fit(canon) : spline_fit(canon);
    const Vector<double> clamped = x_grid.cwiseMax(spline.x_min()).cwiseMin(spline.x_max());
    SpectralCurve dense = resample_dense(spline, clamped);
    if (dense.size() == x_grid.size())
        dense.x() = x_grid;
    return dense;
}

PipelineResult run_pipeline(const SpectralCurve& curve, const PipelineConfig& cfg)
{
    PipelineResult r;
    auto canon = canonicalize(curve);
    r.original = std::move(canon.curve);
    if (canon.dropped_nonfinite > 0)
        r.warnings.push_back(std::to_string(canon.dropped_nonfinite) + " non-finite point(s) dropped");
    if (canon.collapsed_duplicates > 0)
        r.warnings.push_back(std::to_string(canon.collapsed_duplicates) + " duplicate x value(s) averaged");

    if (cfg.smooth && !cfg.stick && r.original.size() >= cfg.sg.window) {
        r.smoothed = sg_smooth(r.original, cfg.sg);
    } else {
        if (cfg.smooth && !cfg.stick)
            r.warnings.push_back("curve shorter than smoothing window; not smoothed");
        r.smoothed = r.original;
    }

    r.sample = sample_curve(r.smoothed, cfg.sampling);
    for (const auto& w : r.sample.warnings)
        r.warnings.push_back(w);

    const SpectralCurve& knots = r.sample.merged.sampled;
    if (knots.size() < 2) {
        r.reconstructed = r.original;
        return r;
    }
    const Vector<double> grid =
        cfg.uniform_k ? Vector<double>::LinSpaced(*cfg.uniform_k, knots.points(0, 0), knots.points(knots.size() - 1, 0))
                      : Vector<double>(r.original.x());
    r.reconstructed = reconstruct_on_grid(knots, grid, interpolant_for(cfg));
    r.reconstructed.name = r.original.name;
    r.reconstructed.x_label = r.original.x_label;
    r.reconstructed.y_label = r.original.y_label;
    return r;
}

} // namespace specfid
