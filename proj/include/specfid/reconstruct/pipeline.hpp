#pragma once

#include <optional>
#include <string>
#include <vector>

#include "specfid/core/curve.hpp"
#include "specfid/preprocess/savgol.hpp"
#include "specfid/reconstruct/cubic_spline.hpp"
#include "specfid/sampling/sampling.hpp"

namespace specfid {

/// NaturalCubic is the default. Monotone is the shape-preserving cubic
/// Hermite fit (C1, no overshoot). Stick treats samples as impulses over the
/// floor between them, matching how stick spectra are drawn.
enum class Interpolant { NaturalCubic, Monotone, Stick };

struct PipelineConfig {
    SgConfig sg;
    SamplingConfig sampling;
    bool smooth = true;
    bool stick = false;                     // stick spectra skip smoothing and use Stick
    std::optional<Interpolant> interpolant; // overrides the stick-based choice
    std::optional<Eigen::Index> uniform_k;  // dense grid: original x when unset
};

struct PipelineResult {
    SpectralCurve original; // canonicalized input
    SpectralCurve smoothed;
    SampleResult sample;
    SpectralCurve reconstructed;
    std::vector<std::string> warnings;
};

/// smooth -> sample -> spline -> dense resample for one curve.
/// Curves shorter than the smoothing window are passed through unsmoothed
/// with a warning.
PipelineResult run_pipeline(const SpectralCurve& curve, const PipelineConfig& cfg = {});

/// Interpolant through already sampled points, evaluated on `x_grid` (clamped
/// to the knot range, so grids reaching past the sample ends stay in domain).
SpectralCurve reconstruct_on_grid(const SpectralCurve& sampled, const Vector<double>& x_grid,
                                  Interpolant kind = Interpolant::NaturalCubic);

inline Interpolant interpolant_for(const PipelineConfig& cfg)
{
    return cfg.interpolant.value_or(cfg.stick ? Interpolant::Stick : Interpolant::NaturalCubic);
}

} // namespace specfid
