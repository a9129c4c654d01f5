#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "specfid/metrics/fidelity.hpp"

using namespace specfid;
using testutil::curve;

namespace {

PointMatrix<double> pts(std::initializer_list<std::pair<double, double>> list)
{
    return curve(list).points;
}

SpectralCurve horizontal(double y, int n = 11, double x0 = 0, double x1 = 1)
{
    return testutil::sampled_fn(n, x0, x1, [y](double) { return y; });
}

} // namespace

TEST_CASE("single-point distances")
{
    auto a = pts({{0, 0}});
    auto b = pts({{1, 0}});
    CHECK(chamfer(a, b) == 2.0);
    CHECK(hausdorff(a, b) == 1.0);
    CHECK(chamfer(a, a) == 0.0);
    CHECK(hausdorff(a, a) == 0.0);
    CHECK_THROWS_AS(chamfer(a, PointMatrix<double>(0, 2)), Error);
}

TEST_CASE("chamfer and hausdorff agree with brute force")
{
    std::mt19937_64 rng(11);
    for (int t = 0; t < 200; ++t) {
        auto a = testutil::random_cloud(rng, 1 + t % 37);
        auto b = testutil::random_cloud(rng, 1 + (t * 7) % 53);
        const auto oa = testutil::to_pts(a), ob = testutil::to_pts(b);
        CHECK(chamfer(a, b) == doctest::Approx(oracle::chamfer(oa, ob)).epsilon(1e-12));
        CHECK(hausdorff(a, b) == doctest::Approx(oracle::hausdorff(oa, ob)).epsilon(1e-12));
    }
}

TEST_CASE("grid nearest neighbour matches the exhaustive scan")
{
    std::mt19937_64 rng(12);
    for (int t = 0; t < 40; ++t) {
        auto a = testutil::random_cloud(rng, 200 + t * 10);
        PointMatrix<double> b = t % 2 ? testutil::random_cloud(rng, 300) : testutil::random_polyline(rng, 500);
        const auto ex = nearest_sq_distances(a, b, NnMethod::Exhaustive);
        const auto gr = nearest_sq_distances(a, b, NnMethod::Grid);
        CHECK((ex - gr).cwiseAbs().maxCoeff() <= 1e-12);
    }
    // clustered target with a far outlier
    PointMatrix<double> b(101, 2);
    b.topRows(100) = testutil::random_cloud(rng, 100) * 1e-3;
    b.row(100) << 50, 50;
    PointMatrix<double> a = testutil::random_cloud(rng, 50) * 60;
    CHECK((nearest_sq_distances(a, b, NnMethod::Exhaustive) - nearest_sq_distances(a, b, NnMethod::Grid))
              .cwiseAbs()
              .maxCoeff() <= 1e-9);
}

TEST_CASE("paired wasserstein")
{
    std::mt19937_64 rng(3);
    auto a = testutil::random_cloud(rng, 40);
    PointMatrix<double> b = a;
    b.col(1).array() += 0.25;
    CHECK(wasserstein_paired(a, b) == doctest::Approx(0.25));
    CHECK(wasserstein_paired(a, a) == 0.0);
    CHECK_THROWS_AS(wasserstein_paired(a, b.topRows(3)), Error);
}

TEST_CASE("normalized score endpoints")
{
    CHECK(normalized_score(0.0, 4.0, MetricKind::Hausdorff) == 1.0);
    CHECK(normalized_score(2.0, 4.0, MetricKind::Hausdorff) == 0.0);
    CHECK(normalized_score(4.0, 4.0, MetricKind::Chamfer) == 0.0);
    CHECK(normalized_score(1.0, 4.0, MetricKind::Wasserstein, ScoreMode::StrictSquared) == 0.75);
    bool degenerate = false;
    CHECK(normalized_score(0.0, 0.0, MetricKind::Chamfer, ScoreMode::Dimensional, &degenerate) == 1.0);
    CHECK(degenerate);
}

TEST_CASE("squared diameter matches all pairs")
{
    std::mt19937_64 rng(5);
    for (int t = 0; t < 50; ++t) {
        auto a = testutil::random_cloud(rng, 1 + t);
        double best = 0;
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            for (Eigen::Index j = 0; j < a.rows(); ++j)
                best = std::max(best, (a.row(i) - a.row(j)).squaredNorm());
        CHECK(squared_diameter(a) == doctest::Approx(best).epsilon(1e-14));
    }
}

TEST_CASE("metric properties")
{
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-5, 5), s(0.1, 10);
    for (int t = 0; t < 100; ++t) {
        auto a = testutil::random_cloud(rng, 5 + t % 20);
        auto b = testutil::random_cloud(rng, 5 + t % 13);
        auto c = testutil::random_cloud(rng, 7);
        CHECK(chamfer(a, b) == doctest::Approx(chamfer(b, a)));
        CHECK(hausdorff(a, b) == hausdorff(b, a));
        CHECK(hausdorff(a, c) <= hausdorff(a, b) + hausdorff(b, c) + 1e-12);

        // the scores see both sets through their joint bounding box
        const SpectralCurve ca(a), cb(b);
        PointMatrix<double> ta = a, tb = b;
        const double dx = u(rng), dy = u(rng), sx = s(rng), sy = s(rng);
        ta.col(0) = (ta.col(0).array() * sx + dx).matrix();
        tb.col(0) = (tb.col(0).array() * sx + dx).matrix();
        ta.col(1) = (ta.col(1).array() * sy + dy).matrix();
        tb.col(1) = (tb.col(1).array() * sy + dy).matrix();
        ScoreOptions opts;
        opts.nn = NnMethod::Exhaustive;
        PointMatrix<double> paired_b = b.topRows(std::min(a.rows(), b.rows()));
        const auto r1 = fidelity_report(SpectralCurve(PointMatrix<double>(a.topRows(paired_b.rows()))),
                                        SpectralCurve(paired_b), opts);
        const auto r2 = fidelity_report(SpectralCurve(PointMatrix<double>(ta.topRows(paired_b.rows()))),
                                        SpectralCurve(PointMatrix<double>(tb.topRows(paired_b.rows()))), opts);
        CHECK(r1.score_cd == doctest::Approx(r2.score_cd).epsilon(1e-9));
        CHECK(r1.score_hd == doctest::Approx(r2.score_hd).epsilon(1e-9));
        CHECK(r1.score_wd == doctest::Approx(r2.score_wd).epsilon(1e-9));
        CHECK(r1.score_cd <= 1.0);
        CHECK(r1.score_hd >= 0.0);
    }
}

TEST_CASE("half-range vertical shift by hand")
{
    const auto truth = horizontal(0.0);
    const auto pred = horizontal(0.5);
    ScoreOptions raw;
    raw.normalize = false;
    const auto r = fidelity_report(truth, pred, raw);
    CHECK(r.d_cd == doctest::Approx(0.5));
    CHECK(r.d_hd == doctest::Approx(0.5));
    CHECK(r.d_wd == doctest::Approx(0.5));
    CHECK(r.diameter_sq == doctest::Approx(1.25));
    CHECK(r.score_cd == doctest::Approx(0.6));
    CHECK(r.score_hd == doctest::Approx(1 - 0.5 / std::sqrt(1.25)));

    // in the joint unit square the two lines sit on opposite edges
    const auto n = fidelity_report(truth, pred);
    CHECK(n.d_hd == doctest::Approx(1.0));
    CHECK(n.score_cd == doctest::Approx(0.0));
    CHECK(n.score_hd == doctest::Approx(1 - 1 / std::sqrt(2.0)));
    CHECK(n.score_wd == doctest::Approx(1 - 1 / std::sqrt(2.0)));

    raw.mode = ScoreMode::StrictSquared;
    CHECK(fidelity_report(truth, pred, raw).score_hd == doctest::Approx(1 - 0.5 / 1.25));
}

TEST_CASE("identical curves score 1")
{
    auto c = testutil::sampled_fn(300, 0, 10, [](double x) { return std::sin(x); });
    const auto r = fidelity_report(c, c);
    CHECK(r.score_cd == 1.0);
    CHECK(r.score_hd == 1.0);
    CHECK(r.score_wd == 1.0);
    const auto single = fidelity_report(curve({{1, 1}}), curve({{1, 1}}));
    CHECK(single.degenerate);
    CHECK(single.score_cd == 1.0);
}

TEST_CASE("hungarian small cases")
{
    Eigen::MatrixXd c(2, 2);
    c << 1, 2, 2, 1;
    auto a = hungarian_assign(c);
    REQUIRE(a.pairs.size() == 2);
    CHECK(a.pairs[0].truth == 0);
    CHECK(a.pairs[1].truth == 1);
    CHECK(a.total_cost() == 2.0);

    Eigen::MatrixXd r(1, 3);
    r << 5, 1, 3;
    a = hungarian_assign(r);
    REQUIRE(a.pairs.size() == 1);
    CHECK(a.pairs[0].truth == 1);
    CHECK(a.unmatched_truth == std::vector<Eigen::Index>{0, 2});
    CHECK(a.unmatched_pred.empty());

    Eigen::MatrixXd tall = r.transpose();
    a = hungarian_assign(tall);
    REQUIRE(a.pairs.size() == 1);
    CHECK(a.pairs[0].pred == 1);
    CHECK(a.unmatched_pred == std::vector<Eigen::Index>{0, 2});

    Eigen::MatrixXd bad(1, 1);
    bad << std::nan("");
    CHECK_THROWS_AS(hungarian_assign(bad), Error);
    CHECK_THROWS_AS(hungarian_assign(Eigen::MatrixXd(0, 0)), Error);
}

TEST_CASE("hungarian matches permutation search")
{
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0, 10);
    for (int t = 0; t < 100; ++t) {
        const int n = 1 + t % 6;
        Eigen::MatrixXd c(n, n);
        std::vector<double> flat;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                c(i, j) = t % 3 ? u(rng) : std::floor(u(rng) / 3); // ties
                flat.push_back(c(i, j));
            }
        const auto a = hungarian_assign(c);
        CHECK(a.pairs.size() == std::size_t(n));
        CHECK(a.total_cost() == doctest::Approx(oracle::best_assignment(flat, n)).epsilon(1e-12));
        std::vector<Eigen::Index> cols;
        for (const auto& p : a.pairs)
            cols.push_back(p.truth);
        std::sort(cols.begin(), cols.end());
        CHECK(std::adjacent_find(cols.begin(), cols.end()) == cols.end());
    }
}

TEST_CASE("rectangular hungarian equals the best padded permutation")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 60; ++t) {
        const int n = 1 + t % 5, m = 1 + (t / 5) % 5;
        Eigen::MatrixXd c(n, m);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j)
                c(i, j) = u(rng);
        const int k = std::max(n, m);
        std::vector<double> flat(static_cast<std::size_t>(k * k), 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j)
                flat[static_cast<std::size_t>(i * k + j)] = c(i, j);
        const auto a = hungarian_assign(c);
        CHECK(a.pairs.size() == std::size_t(std::min(n, m)));
        CHECK(a.total_cost() == doctest::Approx(oracle::best_assignment(flat, k)).epsilon(1e-12));
    }
}

TEST_CASE("subplot scoring with extra predicted lines")
{
    SubplotAnswer truth, pred;
    truth.subplot_id = pred.subplot_id = "A";
    for (int k = 0; k < 7; ++k)
        truth.lines.push_back(testutil::sampled_fn(60, 0, 10, [k](double x) { return k * 3 + std::sin(x + k); }));
    for (int k = 0; k < 7; ++k)
        pred.lines.push_back(testutil::sampled_fn(23, 0, 10, [k](double x) { return k * 3 + std::sin(x + k) + 0.05; }));
    // two hallucinated lines far above everything
    pred.lines.push_back(horizontal(40, 20, 0, 10));
    pred.lines.push_back(horizontal(45, 20, 0, 10));

    const auto s = score_subplot_all(pred, truth);
    REQUIRE(s.assignment.pairs.size() == 7);
    for (const auto& p : s.assignment.pairs)
        CHECK(p.pred == p.truth);
    CHECK(s.assignment.unmatched_pred == std::vector<Eigen::Index>{7, 8});
    CHECK(s.score_cd > 0.99);

    // the assignment does not depend on line order
    SubplotAnswer shuffled = pred;
    std::mt19937_64 rng(1);
    std::shuffle(shuffled.lines.begin(), shuffled.lines.end(), rng);
    const auto s2 = score_subplot_all(shuffled, truth);
    CHECK(s2.score_cd == doctest::Approx(s.score_cd).epsilon(1e-12));
    CHECK(s2.score_hd == doctest::Approx(s.score_hd).epsilon(1e-12));
    CHECK(s2.score_wd == doctest::Approx(s.score_wd).epsilon(1e-12));

    // fewer predicted lines: averaged over matches unless penalized
    SubplotAnswer three = pred;
    three.lines.resize(3);
    const auto lenient = score_subplot_all(three, truth);
    CHECK(lenient.assignment.unmatched_truth.size() == 4);
    ScoreOptions strict;
    strict.penalize_unmatched = true;
    const auto penal = score_subplot_all(three, truth, strict);
    CHECK(penal.score_cd == doctest::Approx(lenient.score_cd * 3 / 7));
}

TEST_CASE("empty prediction scores zero with a diagnostic")
{
    SubplotAnswer truth;
    truth.lines.push_back(horizontal(1));
    SubplotAnswer pred;
    const auto s = score_subplot_all(pred, truth);
    CHECK(s.score_cd == 0.0);
    CHECK(s.assignment.unmatched_truth.size() == 1);
    REQUIRE_FALSE(s.diagnostics.empty());
    CHECK(s.diagnostics.back().kind == "empty_prediction");
    CHECK_THROWS_AS(score_subplot_all(truth, SubplotAnswer{}), Error);
}

TEST_CASE("resample_linear")
{
    auto c = curve({{0, 0}, {2, 4}});
    Vector<double> x(4);
    x << -1, 0.5, 2, 3;
    auto r = resample_linear(c, x);
    CHECK(r(0, 1) == 0);
    CHECK(r(1, 1) == 1);
    CHECK(r(2, 1) == 4);
    CHECK(r(3, 1) == 4);
}
