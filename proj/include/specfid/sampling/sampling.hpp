#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "specfid/core/curve.hpp"
#include "specfid/sampling/rdp.hpp"

namespace specfid {

inline constexpr double kDefaultEpsilon = 0.005;
inline constexpr double kDefaultBaselineFraction = 0.05;

/// Baseline fraction plus at most one of: a fixed RDP threshold (unit-square
/// distance), an absolute point budget, or a budget as a fraction of N.
/// With none set, kDefaultEpsilon applies.
struct SamplingConfig {
    double baseline_fraction = kDefaultBaselineFraction;
    std::optional<double> epsilon;
    std::optional<Eigen::Index> target_points;
    std::optional<double> budget_fraction;

    void validate() const;
    /// Resolved point budget for an N-point curve, if budget-driven.
    std::optional<Eigen::Index> budget_for(Eigen::Index n) const;
};

/// k = max(2, ceil(fraction·N)) indices at round(i·(N−1)/(k−1)).
IndexSet uniform_sample(Eigen::Index n, double fraction);

template <typename Scalar>
IndexSet uniform_sample(const BasicCurve<Scalar>& curve, double fraction)
{
    return uniform_sample(curve.size(), fraction);
}

/// Sorted union of two index sets.
IndexSet merge_indices(const IndexSet& a, const IndexSet& b);

struct MergedSample {
    SpectralCurve sampled;
    IndexSet indices;
    double reduction_ratio = 0;
};

MergedSample merge_samples(const SpectralCurve& curve, const IndexSet& baseline, const IndexSet& critical);

struct AutotuneResult {
    double epsilon = 0;
    IndexSet critical;
    bool reachable = true;
    std::string warning;
};

/// Log-space bisection of epsilon over [1e-6, 1] (40 probes) for the smallest
/// threshold whose merged sample (baseline ∪ RDP) fits in target_points.
/// `unit_points` must already be in unit-square coordinates. When even
/// epsilon = 1 overflows the budget the endpoints alone are returned.
AutotuneResult autotune_epsilon(const PointMatrix<double>& unit_points, Eigen::Index target_points,
                                const IndexSet& baseline = {});

struct SampleResult {
    MergedSample merged;
    IndexSet baseline;
    IndexSet critical;
    double epsilon_used = 0;
    std::vector<std::string> warnings;
};

/// Steps 2 and 3 of the key-point strategy on an already smoothed, canonical
/// curve: uniform baseline plus RDP critical points in unit-square coordinates.
SampleResult sample_curve(const SpectralCurve& smoothed, const SamplingConfig& cfg = {});

} // namespace specfid
