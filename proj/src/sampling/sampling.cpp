#include "specfid/sampling/sampling.hpp"

#include <algorithm>

namespace specfid {

void SamplingConfig::validate() const
{
    if (!(baseline_fraction > 0.0 && baseline_fraction <= 1.0))
        throw Error(ErrorCode::InvalidConfig, "baseline fraction must lie in (0, 1]");
    const int set = int(epsilon.has_value()) + int(target_points.has_value()) + int(budget_fraction.has_value());
    if (set > 1)
        throw Error(ErrorCode::InvalidConfig, "epsilon, target points and budget fraction are mutually exclusive");
    if (epsilon && !(*epsilon > 0.0))
        throw Error(ErrorCode::InvalidConfig, "epsilon must be positive");
    if (target_points && *target_points < 2)
        throw Error(ErrorCode::InvalidConfig, "target points must be at least 2");
    if (budget_fraction && !(*budget_fraction > 0.0 && *budget_fraction <= 1.0))
        throw Error(ErrorCode::InvalidConfig, "budget fraction must lie in (0, 1]");
}

std::optional<Eigen::Index> SamplingConfig::budget_for(Eigen::Index n) const
{
    if (target_points)
        return std::min(*target_points, n);
    if (budget_fraction)
        return std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(*budget_fraction * double(n) + 1e-9)), 2, n);
    return std::nullopt;
}

IndexSet uniform_sample(Eigen::Index n, double fraction)
{
    if (n <= 0)
        return {};
    if (n == 1)
        return {0};
    // the 1e-9 guard keeps products like 0.05 * 1000 from ceiling to 51
    auto k = static_cast<Eigen::Index>(std::ceil(fraction * double(n) - 1e-9));
    k = std::clamp<Eigen::Index>(k, 2, n);
    IndexSet idx;
    idx.reserve(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < k; ++i) {
        const auto v = static_cast<Eigen::Index>(std::llround(double(i) * double(n - 1) / double(k - 1)));
        if (idx.empty() || idx.back() != v)
            idx.push_back(v);
    }
    return idx;
}

IndexSet merge_indices(const IndexSet& a, const IndexSet& b)
{
    IndexSet out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

MergedSample merge_samples(const SpectralCurve& curve, const IndexSet& baseline, const IndexSet& critical)
{
    auto sorted = [](IndexSet s) {
        std::sort(s.begin(), s.end());
        return s;
    };
    MergedSample m;
    m.indices = merge_indices(sorted(baseline), sorted(critical));
    for (Eigen::Index i : m.indices)
        if (i < 0 || i >= curve.size())
            throw Error(ErrorCode::InvalidInput, "sample index " + std::to_string(i) + " out of range");
    m.sampled = curve.select(m.indices);
    m.reduction_ratio = curve.size() > 0 ? double(m.indices.size()) / double(curve.size()) : 0.0;
    return m;
}

AutotuneResult autotune_epsilon(const PointMatrix<double>& unit_points, Eigen::Index target_points,
                                const IndexSet& baseline)
{
    const Eigen::Index n = unit_points.rows();
    if (target_points < 2 || target_points > n)
        throw Error(ErrorCode::InvalidConfig, "target points must lie in [2, N]");

    const Vector<double> importance = rdp_importance(unit_points);
    std::vector<char> in_baseline(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i : baseline)
        in_baseline[static_cast<std::size_t>(i)] = 1;
    auto merged_size = [&](double eps) {
        Eigen::Index count = 0;
        for (Eigen::Index i = 0; i < n; ++i)
            count += (in_baseline[static_cast<std::size_t>(i)] || importance(i) > eps) ? 1 : 0;
        return count;
    };

    constexpr double kLo = 1e-6;
    constexpr double kHi = 1.0;
    AutotuneResult r;
    if (merged_size(kLo) <= target_points) {
        r.epsilon = kLo;
    } else if (merged_size(kHi) > target_points) {
        r.epsilon = kHi;
        r.reachable = false;
        r.critical = {0, n - 1};
        r.warning = "point budget " + std::to_string(target_points) + " unreachable; keeping endpoints only";
        return r;
    } else {
        double lo = kLo, hi = kHi;
        for (int it = 0; it < 40; ++it) {
            const double mid = std::sqrt(lo * hi);
            if (merged_size(mid) <= target_points)
                hi = mid;
            else
                lo = mid;
        }
        r.epsilon = hi;
    }
    r.critical = rdp_simplify(unit_points, r.epsilon);
    return r;
}

SampleResult sample_curve(const SpectralCurve& smoothed, const SamplingConfig& cfg)
{
    cfg.validate();
    if (smoothed.empty())
        throw Error(ErrorCode::EmptyCurve, "cannot sample an empty curve");
    const auto norm = fit_unit_square(smoothed, smoothed);
    const PointMatrix<double> unit = norm.apply(smoothed.points);

    SampleResult out;
    out.baseline = uniform_sample(smoothed.size(), cfg.baseline_fraction);
    if (auto budget = cfg.budget_for(smoothed.size()); budget && smoothed.size() >= 2) {
        AutotuneResult tuned = autotune_epsilon(unit, *budget, out.baseline);
        out.epsilon_used = tuned.epsilon;
        out.critical = std::move(tuned.critical);
        if (!tuned.reachable)
            out.warnings.push_back(tuned.warning);
    } else {
        out.epsilon_used = cfg.epsilon.value_or(kDefaultEpsilon);
        out.critical = rdp_simplify(unit, out.epsilon_used);
    }
    out.merged = merge_samples(smoothed, out.baseline, out.critical);
    return out;
}

} // namespace specfid
