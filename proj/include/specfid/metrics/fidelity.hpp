#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "specfid/core/subplot.hpp"
#include "specfid/metrics/distances.hpp"
#include "specfid/metrics/hungarian.hpp"

namespace specfid {

struct ScoreOptions {
    bool normalize = true; // map the joint bounding box to the unit square first
    ScoreMode mode = ScoreMode::Dimensional;
    MetricKind match_metric = MetricKind::Chamfer;
    bool penalize_unmatched = false;
    NnMethod nn = NnMethod::Auto;
};

/// Distances between a truth curve and a reconstruction, their scores, and
/// the context needed to interpret them.
struct FidelityReport {
    double d_cd = 0, d_hd = 0, d_wd = 0;
    double score_cd = 1, score_hd = 1, score_wd = 1;
    double diameter_sq = 0;
    std::optional<double> reduction_ratio;
    bool degenerate = false;

    double distance(MetricKind k) const;
    double score(MetricKind k) const;
};

void to_json(nlohmann::json& j, const FidelityReport& r);

/// Piecewise-linear resample of `curve` at `x` with constant extension past
/// its ends. Used to pair lines of different length for the paired metric.
PointMatrix<double> resample_linear(const SpectralCurve& curve, const Vector<double>& x);

/// All three distances between truth and reconstruction (canonical curves).
/// The paired metric uses the reconstruction resampled on the truth grid
/// unless both already share it.
FidelityReport fidelity_report(const SpectralCurve& truth, const SpectralCurve& rec, const ScoreOptions& opts = {});

/// Same, on curves already expressed in the scoring frame.
FidelityReport fidelity_report_prenormalized(const SpectralCurve& truth, const SpectralCurve& rec,
                                            const ScoreOptions& opts = {});

struct SubplotScore {
    double score_cd = 0, score_hd = 0, score_wd = 0;
    LineAssignment assignment;
    std::vector<FidelityReport> pair_reports; // parallel to assignment.pairs
    std::vector<Warning> diagnostics;

    double score(MetricKind k) const;
};

void to_json(nlohmann::json& j, const SubplotScore& s);

/// Matches predicted lines to truth lines by minimum total cost (the
/// configured match metric, in jointly normalized coordinates) and averages
/// per-pair scores over matched pairs. Unmatched truth lines count as zero
/// only with penalize_unmatched. A prediction without lines scores 0.
SubplotScore score_subplot_all(const SubplotAnswer& pred, const SubplotAnswer& truth, const ScoreOptions& opts = {});

struct SubplotKindScore {
    double score = 0;
    LineAssignment assignment;
};

SubplotKindScore score_subplot(const SubplotAnswer& pred, const SubplotAnswer& truth, MetricKind kind,
                               const ScoreOptions& opts = {});

} // namespace specfid
