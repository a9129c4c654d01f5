#include "doctest.h"

#include <cmath>
#include <map>

#include "helpers.hpp"
#include "specfid/core/curve_io.hpp"
#include "specfid/wirefmt/wirefmt.hpp"

using namespace specfid;

namespace {

std::string corpus(const std::string& name)
{
    return read_text_file(std::string(SPECFID_TEST_DATA) + "/model_answers/" + name + ".txt");
}

std::size_t count_kind(const ParseDiagnostics& d, const std::string& kind)
{
    return static_cast<std::size_t>(
        std::count_if(d.warnings.begin(), d.warnings.end(), [&](const Warning& w) { return w.kind == kind; }));
}

} // namespace

TEST_CASE("example answer parses cleanly")
{
    const std::string text = "<subplot A>\n"
                             "<line 1>[0.00,1.25],[1.00,2.50],[2.00,3.75]</line>\n"
                             "<line 2>[0.00,0.80],[1.00,1.60],[2.00,2.40]</line>\n"
                             "</subplot>";
    const auto p = parse_answer(text);
    REQUIRE(p.subplots.size() == 1);
    CHECK(p.subplots[0].subplot_id == "A");
    REQUIRE(p.subplots[0].lines.size() == 2);
    CHECK(p.subplots[0].lines[0].size() == 3);
    CHECK(p.subplots[0].lines[1].size() == 3);
    CHECK(p.subplots[0].lines[1].points(2, 1) == 2.40);
    CHECK(p.diagnostics.warnings.empty());
    CHECK(p.diagnostics.salvaged_points == 6);
}

TEST_CASE("two-decimal formatting follows exact half-to-even")
{
    const double table[] = {2.675, 1.005, 0.125, 0.375, -0.125, 2.5,     -0.004, -0.005, 0.0,    1e-9,
                            99.995, 1.115, 3.14159, -2.345, 1234.565, 0.045, 0.055, 7.0,    -7.125, 530.125};
    for (double v : table) {
        CAPTURE(v);
        CHECK(format_two_decimals(v) == oracle::two_decimals(v));
    }
    CHECK(format_two_decimals(2.675) == "2.67");
    CHECK(format_two_decimals(0.125) == "0.12");
    CHECK(format_two_decimals(0.375) == "0.38");
    CHECK(format_two_decimals(-0.004) == "0.00");
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1000, 1000);
    for (int i = 0; i < 5000; ++i) {
        const double v = u(rng);
        CHECK(format_two_decimals(v) == oracle::two_decimals(v));
    }
}

TEST_CASE("serialization is exact")
{
    SubplotAnswer a;
    a.subplot_id = "A";
    a.lines.push_back(testutil::curve({{0, 1.25}, {1, 2.5}}));
    CHECK(serialize_subplot(a) == "<subplot A>\n<line 1>[0.00,1.25],[1.00,2.50]</line>\n</subplot>");
    CHECK_THROWS_AS(serialize_subplot(SubplotAnswer{}), Error);
    a.lines.push_back(SpectralCurve{});
    CHECK_THROWS_AS(serialize_subplot(a), Error);
}

TEST_CASE("round trip on generated answers")
{
    std::mt19937_64 rng(2718);
    std::uniform_int_distribution<int> n_lines(1, 6), n_pts(2, 40), step(1, 300), start(-50000, 50000);
    std::uniform_real_distribution<double> y(-500, 500);
    const char* ids[] = {"A", "B", "c", "1"};
    for (int t = 0; t < 1000; ++t) {
        SubplotAnswer a;
        a.subplot_id = ids[t % 4];
        const int L = n_lines(rng);
        for (int l = 0; l < L; ++l) {
            const int n = n_pts(rng);
            PointMatrix<double> m(n, 2);
            long x = start(rng);
            for (int i = 0; i < n; ++i) {
                m(i, 0) = double(x) / 100.0;
                m(i, 1) = y(rng);
                x += step(rng);
            }
            a.lines.emplace_back(std::move(m));
        }
        const auto parsed = parse_answer(serialize_subplot(a));
        REQUIRE(parsed.subplots.size() == 1);
        CHECK(parsed.diagnostics.warnings.empty());
        const auto& b = parsed.subplots[0];
        CHECK(b.subplot_id == a.subplot_id);
        REQUIRE(b.lines.size() == a.lines.size());
        bool same = true;
        for (std::size_t l = 0; l < a.lines.size(); ++l) {
            REQUIRE(b.lines[l].size() == a.lines[l].size());
            for (Eigen::Index i = 0; i < a.lines[l].size(); ++i)
                for (int c = 0; c < 2; ++c)
                    same = same && b.lines[l].points(i, c) == std::stod(format_two_decimals(a.lines[l].points(i, c)));
        }
        CHECK(same);
    }
}

TEST_CASE("model answer corpus line counts")
{
    const std::map<std::string, std::size_t> expected = {
        {"deepseek_vl2", 9}, {"gpt_o4_mini", 7}, {"gpt_5", 7}, {"gemini_2_5_pro", 7}};
    for (const auto& [name, lines] : expected) {
        CAPTURE(name);
        const auto p = parse_answer(corpus(name));
        REQUIRE(p.subplots.size() == 1);
        CHECK(p.subplots[0].lines.size() == lines);
        for (const auto& l : p.subplots[0].lines)
            CHECK(l.size() >= 2);
    }
    const auto q = parse_answer(corpus("qwen3_vl_32b"));
    REQUIRE(q.subplots.size() == 1);
    CHECK(q.subplots[0].lines.size() >= 3);
    CHECK(q.subplots[0].subplot_id == "a");
}

TEST_CASE("corpus deviations are reported")
{
    const auto ds = parse_answer(corpus("deepseek_vl2"));
    CHECK(count_kind(ds.diagnostics, "ellipsis") == 9);
    // the surrounding points survive: 2 before and 2 after each ellipsis
    for (const auto& l : ds.subplots[0].lines)
        CHECK(l.size() == 4);

    const auto o4 = parse_answer(corpus("gpt_o4_mini"));
    CHECK(count_kind(o4.diagnostics, "line_tag_spacing") == 7);

    const auto g5 = parse_answer(corpus("gpt_5"));
    CHECK(count_kind(g5.diagnostics, "literal_escape") > 0);

    const auto qw = parse_answer(corpus("qwen3_vl_32b"));
    CHECK(count_kind(qw.diagnostics, "truncated_point") == 1);
    std::vector<Warning> notes;
    CHECK(select_subplot(qw, "A", &notes).lines.size() == qw.subplots[0].lines.size());
    REQUIRE(notes.size() == 1);
    CHECK(notes[0].kind == "label_case");
    const auto& last = qw.subplots[0].lines.back();
    CHECK(last.points(last.size() - 1, 0) == 558.0);

    // deterministic diagnostics
    for (const char* name : {"deepseek_vl2", "gpt_o4_mini", "gpt_5", "gemini_2_5_pro", "qwen3_vl_32b"}) {
        const auto a = parse_answer(corpus(name));
        const auto b = parse_answer(corpus(name));
        CHECK(a.diagnostics.warnings.size() == b.diagnostics.warnings.size());
    }
}

TEST_CASE("tolerance rules on small inputs")
{
    auto p = parse_answer("<subplot A><line 1>[1,2],[3,4],...,[5,6]</line></subplot>");
    CHECK(p.subplots[0].lines[0].size() == 3);
    CHECK(count_kind(p.diagnostics, "ellipsis") == 1);

    p = parse_answer("<subplot A><line 1>[1,2],[3,4],…[5,6]</line></subplot>");
    CHECK(p.subplots[0].lines[0].size() == 3);
    CHECK(count_kind(p.diagnostics, "ellipsis") == 1);

    p = parse_answer("<subplot B><line 1>[3,4],[1,2],[2,9]</line></subplot>");
    CHECK(p.subplots[0].lines[0].points(0, 0) == 1);
    CHECK(count_kind(p.diagnostics, "unsorted_points") == 1);

    p = parse_answer("<subplot B><line 1>[1,2]</line><line 2>[1,2],[2,3]</line></subplot>");
    CHECK(p.subplots[0].lines.size() == 1);
    CHECK(count_kind(p.diagnostics, "short_line") == 1);

    p = parse_answer("<line 1>[1,2],[2,3]</line>");
    REQUIRE(p.subplots.size() == 1);
    CHECK(p.subplots[0].subplot_id.empty());

    p = parse_answer("<subplot A><line 1>[1,2],[2,3],[4,x]</line></subplot>");
    CHECK(p.subplots[0].lines[0].size() == 2);
    CHECK(count_kind(p.diagnostics, "malformed_point") == 1);
    CHECK(p.diagnostics.dropped_fragments == 1);

    p = parse_answer("<subplot A><line 1>[1,2],[2,3]");
    CHECK(p.subplots[0].lines.size() == 1);
    CHECK(count_kind(p.diagnostics, "unclosed_line") == 1);
    CHECK(count_kind(p.diagnostics, "unclosed_subplot") == 1);

    CHECK_THROWS_AS(parse_answer("no answer here"), Error);
    CHECK_THROWS_AS(parse_answer(""), Error);
}

TEST_CASE("subplot selection")
{
    const auto p = parse_answer("<subplot A><line 1>[1,2],[2,3]</line></subplot>"
                                "<subplot B><line 1>[5,2],[6,3]</line></subplot>");
    CHECK(select_subplot(p, "b").lines[0].points(0, 0) == 5);
    CHECK_THROWS_AS(select_subplot(p, "C"), Error);
    const auto one = parse_answer("<subplot A><line 1>[1,2],[2,3]</line></subplot>");
    std::vector<Warning> notes;
    CHECK(&select_subplot(one, "Z", &notes) == &one.subplots[0]);
    CHECK(notes.size() == 1);
}
