#include "specfid/metrics/fidelity.hpp"

#include <algorithm>

namespace specfid {

double FidelityReport::distance(MetricKind k) const
{
    switch (k) {
    case MetricKind::Chamfer: return d_cd;
    case MetricKind::Hausdorff: return d_hd;
    case MetricKind::Wasserstein: return d_wd;
    }
    return 0;
}

double FidelityReport::score(MetricKind k) const
{
    switch (k) {
    case MetricKind::Chamfer: return score_cd;
    case MetricKind::Hausdorff: return score_hd;
    case MetricKind::Wasserstein: return score_wd;
    }
    return 0;
}

double SubplotScore::score(MetricKind k) const
{
    switch (k) {
    case MetricKind::Chamfer: return score_cd;
    case MetricKind::Hausdorff: return score_hd;
    case MetricKind::Wasserstein: return score_wd;
    }
    return 0;
}

void to_json(nlohmann::json& j, const FidelityReport& r)
{
    j = nlohmann::json{{"d_cd", r.d_cd},         {"d_hd", r.d_hd},         {"d_wd", r.d_wd},
                       {"score_cd", r.score_cd}, {"score_hd", r.score_hd}, {"score_wd", r.score_wd},
                       {"diameter_sq", r.diameter_sq}};
    if (r.reduction_ratio)
        j["reduction_ratio"] = *r.reduction_ratio;
    if (r.degenerate)
        j["degenerate"] = true;
}

void to_json(nlohmann::json& j, const SubplotScore& s)
{
    nlohmann::json pairs = nlohmann::json::array();
    for (std::size_t k = 0; k < s.assignment.pairs.size(); ++k) {
        nlohmann::json p = s.pair_reports[k];
        p["pred"] = s.assignment.pairs[k].pred;
        p["truth"] = s.assignment.pairs[k].truth;
        p["cost"] = s.assignment.pairs[k].cost;
        pairs.push_back(std::move(p));
    }
    nlohmann::json diags = nlohmann::json::array();
    for (const auto& w : s.diagnostics)
        diags.push_back({{"kind", w.kind}, {"offset", w.offset}, {"message", w.message}});
    j = nlohmann::json{{"score_cd", s.score_cd},
                       {"score_hd", s.score_hd},
                       {"score_wd", s.score_wd},
                       {"pairs", std::move(pairs)},
                       {"unmatched_pred", s.assignment.unmatched_pred},
                       {"unmatched_truth", s.assignment.unmatched_truth},
                       {"diagnostics", std::move(diags)}};
}

PointMatrix<double> resample_linear(const SpectralCurve& curve, const Vector<double>& x)
{
    if (curve.empty())
        throw Error(ErrorCode::EmptySet, "cannot resample an empty curve");
    const Eigen::Index n = curve.size();
    PointMatrix<double> out(x.size(), 2);
    const double* xs = curve.points.col(0).data();
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double q = x(i);
        out(i, 0) = q;
        if (n == 1 || q <= xs[0]) {
            out(i, 1) = curve.points(0, 1);
        } else if (q >= xs[n - 1]) {
            out(i, 1) = curve.points(n - 1, 1);
        } else {
            const auto hi = static_cast<Eigen::Index>(std::upper_bound(xs, xs + n, q) - xs);
            const Eigen::Index lo = hi - 1;
            const double t = (q - xs[lo]) / (xs[hi] - xs[lo]);
            out(i, 1) = curve.points(lo, 1) + t * (curve.points(hi, 1) - curve.points(lo, 1));
        }
    }
    return out;
}

namespace {

PointMatrix<double> paired_partner(const SpectralCurve& truth, const SpectralCurve& rec)
{
    if (rec.size() == truth.size() && rec.x() == truth.x())
        return rec.points;
    return resample_linear(rec, truth.x());
}

double match_cost(const SpectralCurve& pred, const SpectralCurve& truth, MetricKind kind, NnMethod nn)
{
    switch (kind) {
    case MetricKind::Chamfer: return chamfer(pred.points, truth.points, nn);
    case MetricKind::Hausdorff: return hausdorff(pred.points, truth.points, nn);
    case MetricKind::Wasserstein: return wasserstein_paired(truth.points, paired_partner(truth, pred));
    }
    return 0;
}

} // namespace

FidelityReport fidelity_report_prenormalized(const SpectralCurve& truth, const SpectralCurve& rec,
                                            const ScoreOptions& opts)
{
    FidelityReport r;
    const auto cloud = cloud_distances(truth.points, rec.points, opts.nn);
    r.d_cd = cloud.chamfer;
    r.d_hd = cloud.hausdorff;
    r.d_wd = wasserstein_paired(truth.points, paired_partner(truth, rec));
    r.diameter_sq = squared_diameter(truth.points, rec.points);
    bool degenerate = false;
    r.score_cd = normalized_score(r.d_cd, r.diameter_sq, MetricKind::Chamfer, opts.mode, &degenerate);
    r.score_hd = normalized_score(r.d_hd, r.diameter_sq, MetricKind::Hausdorff, opts.mode);
    r.score_wd = normalized_score(r.d_wd, r.diameter_sq, MetricKind::Wasserstein, opts.mode);
    r.degenerate = degenerate;
    return r;
}

FidelityReport fidelity_report(const SpectralCurve& truth, const SpectralCurve& rec, const ScoreOptions& opts)
{
    if (truth.empty() || rec.empty())
        throw Error(ErrorCode::EmptySet, "fidelity needs non-empty curves");
    if (!opts.normalize)
        return fidelity_report_prenormalized(truth, rec, opts);
    const auto norm = fit_unit_square(truth, rec);
    return fidelity_report_prenormalized(norm.apply(truth), norm.apply(rec), opts);
}

SubplotScore score_subplot_all(const SubplotAnswer& pred, const SubplotAnswer& truth, const ScoreOptions& opts)
{
    if (truth.lines.empty())
        throw Error(ErrorCode::InvalidInput, "truth subplot '" + truth.subplot_id + "' has no lines");
    SubplotScore out;
    out.diagnostics = pred.diagnostics;
    std::vector<const SpectralCurve*> pred_lines;
    for (const auto& l : pred.lines)
        if (!l.empty())
            pred_lines.push_back(&l);
    if (pred_lines.empty()) {
        out.diagnostics.push_back({"empty_prediction", 0, "prediction has no parseable lines; scored 0"});
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(truth.lines.size()); ++j)
            out.assignment.unmatched_truth.push_back(j);
        return out;
    }

    AxisNormalization<double> norm;
    if (opts.normalize) {
        std::vector<const PointMatrix<double>*> sets;
        for (const auto* l : pred_lines)
            sets.push_back(&l->points);
        for (const auto& l : truth.lines)
            sets.push_back(&l.points);
        norm = fit_unit_square<double>(sets);
    }
    std::vector<SpectralCurve> p, t;
    for (const auto* l : pred_lines)
        p.push_back(norm.apply(*l));
    for (const auto& l : truth.lines)
        t.push_back(norm.apply(l));

    Eigen::MatrixXd cost(static_cast<Eigen::Index>(p.size()), static_cast<Eigen::Index>(t.size()));
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < t.size(); ++j)
            cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = match_cost(p[i], t[j], opts.match_metric, opts.nn);
    out.assignment = hungarian_assign(cost);

    double sum_cd = 0, sum_hd = 0, sum_wd = 0;
    for (const auto& pair : out.assignment.pairs) {
        FidelityReport r = fidelity_report_prenormalized(t[static_cast<std::size_t>(pair.truth)],
                                                         p[static_cast<std::size_t>(pair.pred)], opts);
        sum_cd += r.score_cd;
        sum_hd += r.score_hd;
        sum_wd += r.score_wd;
        out.pair_reports.push_back(r);
    }
    std::size_t denom = out.assignment.pairs.size();
    if (opts.penalize_unmatched)
        denom += out.assignment.unmatched_truth.size();
    if (denom > 0) {
        out.score_cd = sum_cd / double(denom);
        out.score_hd = sum_hd / double(denom);
        out.score_wd = sum_wd / double(denom);
    }
    // report original line positions rather than positions among non-empty lines
    std::vector<Eigen::Index> original;
    for (std::size_t i = 0; i < pred.lines.size(); ++i)
        if (!pred.lines[i].empty())
            original.push_back(static_cast<Eigen::Index>(i));
    for (auto& pair : out.assignment.pairs)
        pair.pred = original[static_cast<std::size_t>(pair.pred)];
    for (auto& u : out.assignment.unmatched_pred)
        u = original[static_cast<std::size_t>(u)];
    return out;
}

SubplotKindScore score_subplot(const SubplotAnswer& pred, const SubplotAnswer& truth, MetricKind kind,
                               const ScoreOptions& opts)
{
    SubplotScore all = score_subplot_all(pred, truth, opts);
    return {all.score(kind), std::move(all.assignment)};
}

} // namespace specfid
