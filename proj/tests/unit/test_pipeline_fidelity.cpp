#include "doctest.h"

#include <map>
#include <thread>

#include "specfid/cli/commands.hpp"
#include "specfid/syngen/syngen.hpp"

using namespace specfid;

// Per-instance thresholds on the 700-curve suite: Chamfer >= 0.97,
// Hausdorff >= 0.95 and Wasserstein >= 0.97 on at least 95% of curves.
TEST_CASE("pipeline fidelity holds per instance on the synthetic suite")
{
    const auto suite = fidelity_suite(cli::kDefaultSuiteSeed, 100);
    REQUIRE(suite.size() == 700);
    std::vector<FidelityReport> reports(suite.size());
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < std::max(1u, std::thread::hardware_concurrency()); ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < suite.size(); i = next++) {
                SamplingConfig s;
                s.budget_fraction = cli::kDefaultBudgetFraction;
                const auto r = run_pipeline(suite[i].curves[0], cli::pipeline_config_for(suite[i].spec.type, s));
                reports[i] = fidelity_report(r.original, r.reconstructed);
            }
        });
    for (auto& t : pool)
        t.join();

    std::map<std::string, std::size_t> failing_by_type;
    std::size_t failing = 0, low_cd = 0, low_hd = 0, low_wd = 0;
    for (std::size_t i = 0; i < suite.size(); ++i) {
        const auto& r = reports[i];
        const bool cd = r.score_cd >= 0.97, hd = r.score_hd >= 0.95, wd = r.score_wd >= 0.97;
        low_cd += !cd;
        low_hd += !hd;
        low_wd += !wd;
        if (!(cd && hd && wd)) {
            ++failing;
            ++failing_by_type[std::string(to_string(suite[i].spec.type))];
        }
    }
    for (const auto& [type, n] : failing_by_type)
        MESSAGE(type << ": " << n << " of 100 below threshold");
    MESSAGE("below threshold: cd " << low_cd << ", hd " << low_hd << ", wd " << low_wd);
    const double pass_rate = 1.0 - double(failing) / double(suite.size());
    MESSAGE("instances passing all three: " << pass_rate);
    CHECK(pass_rate >= 0.95);
}
