#include "specfid/wirefmt/wirefmt.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>

namespace specfid {
namespace {

bool ieq_prefix(std::string_view text, std::size_t pos, std::string_view prefix)
{
    if (text.size() - pos < prefix.size())
        return false;
    for (std::size_t k = 0; k < prefix.size(); ++k)
        if (std::tolower(static_cast<unsigned char>(text[pos + k])) != prefix[k])
            return false;
    return true;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s)
{
    while (!s.empty() && is_space(s.front()))
        s.remove_prefix(1);
    while (!s.empty() && is_space(s.back()))
        s.remove_suffix(1);
    return s;
}

std::optional<double> read_number(std::string_view s)
{
    s = trim(s);
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    if (s.empty())
        return std::nullopt;
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        return std::nullopt;
    return v;
}

constexpr std::string_view kEllipsisUtf8 = "\xE2\x80\xA6";

struct OpenLine {
    long index = 0;
    std::size_t tag_offset = 0;
    std::size_t body_begin = 0;
};

class AnswerParser {
public:
    explicit AnswerParser(std::string_view text) : text_(text) {}

    ParsedAnswer run()
    {
        std::size_t pos = 0;
        std::size_t stray_begin = std::string_view::npos;
        auto flush_stray = [&](std::size_t end) {
            if (stray_begin != std::string_view::npos) {
                auto s = trim(text_.substr(stray_begin, end - stray_begin));
                if (!s.empty())
                    warn("stray_text", stray_begin, "ignored text outside any line: '" + std::string(s.substr(0, 40)) + "'");
                stray_begin = std::string_view::npos;
            }
        };
        while (pos < text_.size()) {
            if (line_) {
                // inside a line everything up to the next tag is point data
                const std::size_t next = next_tag(pos);
                pos = next;
                if (pos >= text_.size())
                    break;
            }
            const char c = text_[pos];
            if (c == '<') {
                if (auto consumed = try_tag(pos)) {
                    flush_stray(pos);
                    pos += *consumed;
                    continue;
                }
            }
            if (!line_) {
                if (c == '\\' && pos + 1 < text_.size() && text_[pos + 1] == 'n') {
                    flush_stray(pos);
                    warn("literal_escape", pos, "literal \\n treated as whitespace");
                    pos += 2;
                    continue;
                }
                if (!is_space(c) && stray_begin == std::string_view::npos)
                    stray_begin = pos;
                if (is_space(c) && stray_begin != std::string_view::npos)
                    flush_stray(pos);
            }
            ++pos;
        }
        flush_stray(text_.size());
        if (line_)
            close_line(text_.size(), /*explicit_close=*/false);
        if (subplot_open_)
            close_subplot(text_.size(), false);

        if (out_.subplots.empty())
            throw Error(ErrorCode::NoSubplotFound, "no <subplot> block or <line> run found");
        for (const auto& s : out_.subplots)
            for (const auto& l : s.lines)
                out_.diagnostics.salvaged_points += static_cast<std::size_t>(l.size());
        return std::move(out_);
    }

private:
    // Position of the next recognizable tag at or after pos (text end if none).
    std::size_t next_tag(std::size_t pos) const
    {
        for (std::size_t p = text_.find('<', pos); p != std::string_view::npos; p = text_.find('<', p + 1)) {
            if (ieq_prefix(text_, p, "</line") || ieq_prefix(text_, p, "<line") || ieq_prefix(text_, p, "</subplot") ||
                ieq_prefix(text_, p, "<subplot"))
                return p;
        }
        return text_.size();
    }

    // Returns the tag length if a known tag starts at pos.
    std::optional<std::size_t> try_tag(std::size_t pos)
    {
        const std::size_t gt = text_.find('>', pos);
        const bool closed = gt != std::string_view::npos && text_.find('<', pos + 1) > gt;
        const std::size_t end = closed ? gt + 1 : text_.size();
        auto inner = text_.substr(pos + 1, (closed ? gt : text_.size()) - pos - 1);

        if (ieq_prefix(text_, pos, "</subplot")) {
            if (!closed)
                warn("truncated_tag", pos, "unterminated </subplot> tag");
            if (line_)
                close_line(pos, false);
            if (subplot_open_)
                close_subplot(pos, true);
            else
                warn("stray_close", pos, "</subplot> without an open block");
            return closed ? end - pos : text_.size() - pos;
        }
        if (ieq_prefix(text_, pos, "</line")) {
            if (!closed)
                warn("truncated_tag", pos, "unterminated </line> tag");
            if (line_)
                close_line(pos, true);
            else
                warn("stray_close", pos, "</line> without an open line");
            return closed ? end - pos : text_.size() - pos;
        }
        if (ieq_prefix(text_, pos, "<subplot")) {
            if (line_)
                close_line(pos, false);
            if (subplot_open_)
                close_subplot(pos, false);
            if (!closed)
                warn("truncated_tag", pos, "unterminated <subplot> tag");
            std::string label(trim(inner.substr(std::string_view("subplot").size())));
            open_subplot(label);
            return closed ? end - pos : text_.size() - pos;
        }
        if (ieq_prefix(text_, pos, "<line")) {
            if (!closed) {
                warn("truncated_tag", pos, "unterminated <line> tag");
                return text_.size() - pos;
            }
            if (line_)
                close_line(pos, false);
            if (!subplot_open_) {
                warn("missing_subplot", pos, "<line> outside a <subplot> block; collected into an unnamed block");
                open_subplot("");
            }
            auto rest = inner.substr(std::string_view("line").size());
            const bool spaced = !rest.empty() && is_space(rest.front());
            auto num = trim(rest);
            long index = 0;
            auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), index);
            if (num.empty() || ec != std::errc{} || ptr != num.data() + num.size()) {
                index = last_index_ ? *last_index_ + 1 : 1;
                warn("missing_line_index", pos, "line tag without a number; assigned " + std::to_string(index));
            } else if (!spaced) {
                warn("line_tag_spacing", pos, "<line" + std::string(num) + "> read as <line " + std::string(num) + ">");
            }
            line_ = OpenLine{index, pos, end};
            return end - pos;
        }
        return std::nullopt;
    }

    void open_subplot(std::string id)
    {
        current_ = SubplotAnswer{};
        current_.subplot_id = std::move(id);
        subplot_open_ = true;
        last_index_.reset();
        block_warning_start_ = out_.diagnostics.warnings.size();
    }

    void close_subplot(std::size_t pos, bool explicit_close)
    {
        if (!explicit_close)
            warn("unclosed_subplot", pos, "subplot '" + current_.subplot_id + "' not closed");
        current_.diagnostics.assign(out_.diagnostics.warnings.begin() + static_cast<std::ptrdiff_t>(block_warning_start_),
                                    out_.diagnostics.warnings.end());
        out_.subplots.push_back(std::move(current_));
        subplot_open_ = false;
    }

    void close_line(std::size_t end, bool explicit_close)
    {
        const OpenLine ln = *line_;
        line_.reset();
        if (!explicit_close)
            warn("unclosed_line", end, "line " + std::to_string(ln.index) + " not closed");
        if (last_index_ && ln.index != *last_index_ + 1)
            warn("index_gap", ln.tag_offset,
                 "line " + std::to_string(ln.index) + " follows line " + std::to_string(*last_index_));
        last_index_ = ln.index;

        std::vector<std::pair<double, double>> pts = read_points(ln.body_begin, end);
        const std::string name = "line " + std::to_string(ln.index);
        if (pts.size() < 2) {
            warn("short_line", ln.tag_offset, name + " has " + std::to_string(pts.size()) + " valid point(s); dropped");
            return;
        }
        PointMatrix<double> m(static_cast<Eigen::Index>(pts.size()), 2);
        bool sorted = true;
        for (std::size_t k = 0; k < pts.size(); ++k) {
            m(static_cast<Eigen::Index>(k), 0) = pts[k].first;
            m(static_cast<Eigen::Index>(k), 1) = pts[k].second;
            if (k && !(pts[k].first > pts[k - 1].first))
                sorted = false;
        }
        SpectralCurve curve(std::move(m), name);
        if (!sorted) {
            auto canon = canonicalize(curve);
            if (canon.collapsed_duplicates)
                warn("duplicate_x", ln.tag_offset,
                     name + ": " + std::to_string(canon.collapsed_duplicates) + " repeated x value(s) averaged");
            else
                warn("unsorted_points", ln.tag_offset, name + ": points re-sorted by x");
            curve = std::move(canon.curve);
            if (curve.size() < 2) {
                warn("short_line", ln.tag_offset, name + " collapses to fewer than 2 distinct x; dropped");
                return;
            }
        }
        current_.lines.push_back(std::move(curve));
    }

    std::vector<std::pair<double, double>> read_points(std::size_t begin, std::size_t end)
    {
        std::vector<std::pair<double, double>> pts;
        std::size_t i = begin;
        while (i < end) {
            const char c = text_[i];
            if (is_space(c) || c == ',') {
                ++i;
            } else if (c == '\\' && i + 1 < end && text_[i + 1] == 'n') {
                warn("literal_escape", i, "literal \\n treated as whitespace");
                i += 2;
            } else if (c == '.' && i + 2 < end && text_[i + 1] == '.' && text_[i + 2] == '.') {
                warn("ellipsis", i, "ellipsis token skipped");
                while (i < end && text_[i] == '.')
                    ++i;
            } else if (text_.substr(i, kEllipsisUtf8.size()) == kEllipsisUtf8 && i + kEllipsisUtf8.size() <= end) {
                warn("ellipsis", i, "ellipsis token skipped");
                i += kEllipsisUtf8.size();
            } else if (c == '[') {
                std::size_t j = i + 1;
                while (j < end && text_[j] != ']' && text_[j] != '[')
                    ++j;
                if (j >= end || text_[j] == '[') {
                    warn("truncated_point", i, "unterminated point '" + std::string(trim(text_.substr(i, std::min<std::size_t>(j - i, 40)))) + "' dropped");
                    ++out_.diagnostics.dropped_fragments;
                    i = j;
                    continue;
                }
                auto inner = text_.substr(i + 1, j - i - 1);
                const auto comma = inner.find(',');
                std::optional<double> x, y;
                if (comma != std::string_view::npos && inner.find(',', comma + 1) == std::string_view::npos) {
                    x = read_number(inner.substr(0, comma));
                    y = read_number(inner.substr(comma + 1));
                }
                if (x && y && std::isfinite(*x) && std::isfinite(*y)) {
                    pts.emplace_back(*x, *y);
                } else {
                    warn("malformed_point", i, "could not read point '[" + std::string(inner.substr(0, 40)) + "]'");
                    ++out_.diagnostics.dropped_fragments;
                }
                i = j + 1;
            } else {
                std::size_t j = i;
                while (j < end && text_[j] != '[' && !(text_[j] == '.' && j + 2 < end && text_[j + 1] == '.' && text_[j + 2] == '.'))
                    ++j;
                warn("stray_text", i, "ignored '" + std::string(trim(text_.substr(i, std::min<std::size_t>(j - i, 40)))) + "' inside a line");
                ++out_.diagnostics.dropped_fragments;
                i = j;
            }
        }
        return pts;
    }

    void warn(std::string kind, std::size_t offset, std::string message)
    {
        out_.diagnostics.warnings.push_back({std::move(kind), offset, std::move(message)});
    }

    std::string_view text_;
    ParsedAnswer out_;
    SubplotAnswer current_;
    bool subplot_open_ = false;
    std::optional<OpenLine> line_;
    std::optional<long> last_index_;
    std::size_t block_warning_start_ = 0;
};

} // namespace

ParsedAnswer parse_answer(std::string_view text) { return AnswerParser(text).run(); }

const SubplotAnswer& select_subplot(const ParsedAnswer& parsed, std::string_view id, std::vector<Warning>* notes)
{
    auto upper = [](std::string_view s) {
        std::string u(trim(s));
        std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return std::toupper(c); });
        return u;
    };
    const std::string want = upper(id);
    for (const auto& s : parsed.subplots) {
        if (upper(s.subplot_id) != want)
            continue;
        if (notes && trim(s.subplot_id) != trim(id))
            notes->push_back({"label_case", 0, "subplot label '" + s.subplot_id + "' matched case-insensitively"});
        return s;
    }
    if (parsed.subplots.size() == 1) {
        if (notes)
            notes->push_back({"subplot_fallback", 0,
                              "requested subplot '" + want + "' not found; using sole block '" + parsed.subplots.front().subplot_id + "'"});
        return parsed.subplots.front();
    }
    throw Error(ErrorCode::NoSubplotFound, "subplot '" + want + "' not among " + std::to_string(parsed.subplots.size()) + " blocks");
}

std::string format_two_decimals(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
    if (ec != std::errc{})
        throw Error(ErrorCode::InvalidInput, "value out of range for two-decimal output");
    std::string s(buf, ptr);
    if (s == "-0.00")
        return "0.00";
    return s;
}

std::string serialize_subplot(const SubplotAnswer& answer)
{
    if (answer.lines.empty())
        throw Error(ErrorCode::EmptyAnswer, "subplot '" + answer.subplot_id + "' has no lines");
    std::string out = "<subplot " + answer.subplot_id + ">\n";
    for (std::size_t li = 0; li < answer.lines.size(); ++li) {
        const auto& line = answer.lines[li];
        if (line.empty())
            throw Error(ErrorCode::EmptyAnswer, "line " + std::to_string(li + 1) + " has no points");
        out += "<line " + std::to_string(li + 1) + ">";
        for (Eigen::Index i = 0; i < line.size(); ++i) {
            if (i)
                out += ',';
            out += '[';
            out += format_two_decimals(line.points(i, 0));
            out += ',';
            out += format_two_decimals(line.points(i, 1));
            out += ']';
        }
        out += "</line>\n";
    }
    out += "</subplot>";
    return out;
}

} // namespace specfid
