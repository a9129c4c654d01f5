#include "doctest.h"

#include <cmath>

#include "helpers.hpp"
#include "specfid/preprocess/savgol.hpp"

using namespace specfid;

TEST_CASE("frozen central weights")
{
    const auto w52 = sg_coefficients(5, 2);
    const double e52[] = {-3, 12, 17, 12, -3};
    for (int i = 0; i < 5; ++i)
        CHECK(w52(i) == doctest::Approx(e52[i] / 35.0).epsilon(1e-14));
    const auto w32 = sg_coefficients(3, 2);
    CHECK(std::abs(w32(0)) < 1e-14);
    CHECK(w32(1) == doctest::Approx(1.0));
    CHECK(std::abs(w32(2)) < 1e-14);
    const auto w72 = sg_coefficients(7, 2);
    const double e72[] = {-2, 3, 6, 7, 6, 3, -2};
    for (int i = 0; i < 7; ++i)
        CHECK(w72(i) == doctest::Approx(e72[i] / 21.0).epsilon(1e-14));
}

TEST_CASE("weights match the normal-equations oracle and sum to one")
{
    for (int window = 3; window <= 25; window += 2) {
        for (int order = 0; order < window && order <= 6; ++order) {
            const auto w = sg_coefficients(window, order);
            const auto ref = oracle::sg_weights(window, order);
            double sum = 0;
            for (int i = 0; i < window; ++i) {
                CHECK(std::abs(w(i) - double(ref[static_cast<std::size_t>(i)])) < 1e-12);
                sum += w(i);
            }
            CHECK(std::abs(sum - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("invalid configurations")
{
    CHECK_THROWS_AS(sg_coefficients(4, 2), Error);
    CHECK_THROWS_AS(sg_coefficients(5, 5), Error);
    CHECK_THROWS_AS(sg_coefficients(1, 0), Error);
    auto c = testutil::sampled_fn(5, 0, 1, [](double x) { return x; });
    CHECK_THROWS_AS(sg_smooth(c, SgConfig{11, 3}), Error);
}

TEST_CASE("constant and polynomial inputs are reproduced")
{
    auto flat = testutil::sampled_fn(50, 0, 1, [](double) { return 3.25; });
    auto s = sg_smooth(flat, SgConfig{11, 3});
    CHECK((s.y().array() - 3.25).abs().maxCoeff() < 1e-12);

    auto quad = testutil::sampled_fn(40, -2, 2, [](double x) { return x * x; });
    auto q = sg_smooth(quad, SgConfig{5, 2});
    for (Eigen::Index i = 2; i < 38; ++i)
        CHECK(q.points(i, 1) == doctest::Approx(quad.points(i, 1)).epsilon(1e-12));
    CHECK(q.x() == quad.x());
}

TEST_CASE("random polynomials of degree <= order are fixed points in the interior")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2, 2);
    std::uniform_int_distribution<int> ord(0, 4);
    for (int t = 0; t < 100; ++t) {
        const int order = ord(rng);
        const int window = 2 * (order / 2) + 5 + 2 * (t % 3);
        std::vector<double> coef(static_cast<std::size_t>(order + 1));
        for (auto& c : coef)
            c = u(rng);
        auto poly = [&](double x) {
            double v = 0;
            for (auto it = coef.rbegin(); it != coef.rend(); ++it)
                v = v * x + *it;
            return v;
        };
        auto c = testutil::sampled_fn(60, -1, 1, poly);
        auto s = sg_smooth(c, SgConfig{window, order});
        const int m = window / 2;
        double worst = 0;
        for (Eigen::Index i = m; i < 60 - m; ++i)
            worst = std::max(worst, std::abs(s.points(i, 1) - c.points(i, 1)));
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("smoothing is linear")
{
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    PointMatrix<double> f(80, 2), g(80, 2), h(80, 2);
    for (int i = 0; i < 80; ++i) {
        f(i, 0) = g(i, 0) = h(i, 0) = i;
        f(i, 1) = n(rng);
        g(i, 1) = n(rng);
        h(i, 1) = 2.5 * f(i, 1) - 0.75 * g(i, 1);
    }
    const SgConfig cfg{11, 3};
    auto sf = sg_smooth(SpectralCurve(f), cfg), sg = sg_smooth(SpectralCurve(g), cfg), sh = sg_smooth(SpectralCurve(h), cfg);
    CHECK((sh.y() - (2.5 * sf.y() - 0.75 * sg.y())).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("mirror padding reflects without repeating the edge sample")
{
    CHECK(mirror_index(-1, 10) == 1);
    CHECK(mirror_index(-3, 10) == 3);
    CHECK(mirror_index(10, 10) == 8);
    CHECK(mirror_index(12, 10) == 6);
    CHECK(mirror_index(4, 10) == 4);
    // symmetric data about the first sample: padding must give the same window
    auto even = testutil::sampled_fn(30, 0, 1, [](double x) { return x * x * 7 - x * x * x; });
    auto s = sg_smooth(even, SgConfig{5, 2});
    const auto w = sg_coefficients(5, 2);
    const double expect = w(0) * even.points(2, 1) + w(1) * even.points(1, 1) + w(2) * even.points(0, 1) +
                          w(3) * even.points(1, 1) + w(4) * even.points(2, 1);
    CHECK(s.points(0, 1) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("noisy sine is brought closer to the clean signal")
{
    std::mt19937_64 rng(42);
    std::normal_distribution<double> noise(0.0, 0.1);
    const int n = 500;
    PointMatrix<double> clean(n, 2), noisy(n, 2);
    for (int i = 0; i < n; ++i) {
        const double x = 4 * M_PI * i / (n - 1);
        clean.row(i) << x, std::sin(x);
        noisy.row(i) << x, std::sin(x) + noise(rng);
    }
    auto s = sg_smooth(SpectralCurve(noisy), SgConfig{11, 3});
    const double rms_in = std::sqrt((noisy.col(1) - clean.col(1)).squaredNorm() / n);
    const double rms_out = std::sqrt((s.y() - clean.col(1)).squaredNorm() / n);
    CHECK(rms_out < rms_in);
}
