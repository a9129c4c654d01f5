#include "doctest.h"

#include <cmath>

#include "helpers.hpp"
#include "specfid/reconstruct/pipeline.hpp"
#include "specfid/metrics/fidelity.hpp"
#include "specfid/sampling/sampling.hpp"

using namespace specfid;

namespace {

IndexSet as_index_set(const std::vector<long>& v) { return IndexSet(v.begin(), v.end()); }

} // namespace

TEST_CASE("uniform baseline indices")
{
    CHECK(uniform_sample(100, 0.05) == IndexSet{0, 25, 50, 74, 99});
    CHECK(uniform_sample(2, 0.3) == IndexSet{0, 1});
    const auto k = uniform_sample(1000, 0.05);
    CHECK(k.size() == 50);
    CHECK(k.front() == 0);
    CHECK(k.back() == 999);
    CHECK(uniform_sample(10, 1.0).size() == 10);
    CHECK(uniform_sample(1, 0.5) == IndexSet{0});
}

TEST_CASE("RDP small cases")
{
    PointMatrix<double> line(5, 2);
    for (int i = 0; i < 5; ++i)
        line.row(i) << i * 0.25, 0.1 + i * 0.2;
    CHECK(rdp_simplify(line, 1e-9) == IndexSet{0, 4});

    PointMatrix<double> tri(3, 2);
    tri << 0, 0, 0.5, 1, 1, 0;
    // apex to chord y=0 is exactly 1
    const double apex = oracle::seg_dist({0.5, 1}, {0, 0}, {1, 0});
    CHECK(apex == 1.0);
    CHECK(rdp_simplify(tri, 0.1) == IndexSet{0, 1, 2});
    CHECK(rdp_simplify(tri, 1.0) == IndexSet{0, 2});
}

TEST_CASE("RDP matches the recursive reference on random curves")
{
    std::mt19937_64 rng(200);
    for (int t = 0; t < 100; ++t) {
        auto pts = testutil::random_polyline(rng, 200);
        CHECK(rdp_simplify(pts, 0.02) == as_index_set(oracle::rdp(testutil::to_pts(pts), 0.02)));
    }
}

TEST_CASE("RDP ties keep the lowest index")
{
    PointMatrix<double> m(5, 2);
    m << 0, 0, 0.25, 0.5, 0.5, 0, 0.75, 0.5, 1, 0;
    // points 1 and 3 are equally far; only the lower one splits first
    const auto kept = rdp_simplify(m, 0.3);
    CHECK(kept == as_index_set(oracle::rdp(testutil::to_pts(m), 0.3)));
    CHECK(kept.front() == 0);
}

TEST_CASE("RDP count is monotone in epsilon and importance predicts it")
{
    std::mt19937_64 rng(9);
    for (int t = 0; t < 30; ++t) {
        auto pts = testutil::random_polyline(rng, 300);
        const auto imp = rdp_importance(pts);
        std::size_t prev = std::numeric_limits<std::size_t>::max();
        for (double eps : {1e-4, 1e-3, 5e-3, 1e-2, 5e-2, 0.1, 0.5}) {
            const auto kept = rdp_simplify(pts, eps);
            CHECK(kept.size() <= prev);
            prev = kept.size();
            IndexSet predicted;
            for (Eigen::Index i = 0; i < pts.rows(); ++i)
                if (imp(i) > eps)
                    predicted.push_back(i);
            CHECK(predicted == kept);
        }
    }
}

TEST_CASE("RDP on a long convex curve")
{
    const Eigen::Index n = 200000;
    PointMatrix<double> m(n, 2);
    for (Eigen::Index i = 0; i < n; ++i)
        m.row(i) << double(i) / double(n - 1), std::pow(double(i) / double(n - 1), 8);
    const auto kept = rdp_simplify(m, 1e-12);
    CHECK(kept.size() > 2);
    CHECK(kept.front() == 0);
    CHECK(kept.back() == n - 1);
}

TEST_CASE("merge_samples takes the sorted union")
{
    auto c = testutil::sampled_fn(6, 0, 5, [](double x) { return x; });
    auto m = merge_samples(c, {0, 5}, {0, 3});
    CHECK(m.indices == IndexSet{0, 3, 5});
    CHECK(m.reduction_ratio == doctest::Approx(0.5));

    auto big = testutil::sampled_fn(100, 0, 1, [](double x) { return x; });
    IndexSet a{0, 10, 20, 30, 40}, b;
    for (int i = 50; i < 70; ++i)
        b.push_back(i);
    auto u = merge_samples(big, a, b);
    CHECK(u.sampled.size() == 25);
    CHECK(u.reduction_ratio == doctest::Approx(0.25));

    auto sub = merge_samples(big, a, {10, 30});
    CHECK(sub.indices == a);
}

TEST_CASE("autotune respects the budget")
{
    auto c = testutil::sampled_fn(400, 0, 1, [](double x) { return std::sin(12 * x); });
    auto all = autotune_epsilon(c.points, 400);
    CHECK(all.epsilon == doctest::Approx(1e-6));
    CHECK(all.critical.size() >= 200);

    std::mt19937_64 rng(1);
    auto noisy = testutil::random_polyline(rng, 500);
    auto two = autotune_epsilon(noisy, 2);
    CHECK(two.critical == IndexSet{0, 499});

    auto base = uniform_sample(500, 0.05);
    auto over = autotune_epsilon(noisy, 10, base);
    CHECK_FALSE(over.reachable);
    CHECK(!over.warning.empty());

    CHECK_THROWS_AS(autotune_epsilon(noisy, 1), Error);
}

TEST_CASE("three-Gaussian curve at a 6.7% budget")
{
    auto c = testutil::sampled_fn(2000, 0, 100, [](double x) {
        return std::exp(-std::pow((x - 25) / 3, 2)) + 0.6 * std::exp(-std::pow((x - 50) / 5, 2)) +
               0.8 * std::exp(-std::pow((x - 70) / 2, 2));
    });
    SamplingConfig cfg;
    cfg.target_points = 134;
    auto s = sample_curve(c, cfg);
    CHECK(s.merged.sampled.size() <= 134);
    CHECK(s.merged.indices.front() == 0);
    CHECK(s.merged.indices.back() == 1999);

    PipelineConfig pc;
    pc.sampling = cfg;
    auto r = run_pipeline(c, pc);
    CHECK(fidelity_report(r.original, r.reconstructed).score_cd >= 0.97);
}

TEST_CASE("sampling config validation")
{
    SamplingConfig bad;
    bad.epsilon = 0.01;
    bad.target_points = 5;
    CHECK_THROWS_AS(bad.validate(), Error);
    SamplingConfig frac;
    frac.baseline_fraction = 0;
    CHECK_THROWS_AS(frac.validate(), Error);
    SamplingConfig budget;
    budget.budget_fraction = 0.067;
    CHECK(budget.budget_for(1000) == 67);
}
