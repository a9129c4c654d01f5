#include "specfid/reconstruct/render_svg.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace specfid {
namespace {

constexpr double kLeft = 70, kRight = 20, kTop = 20, kBottom = 50;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

std::string fmt2(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s(buf);
    return s == "-0.00" ? "0.00" : s;
}

std::string xml_escape(const std::string& in)
{
    std::string out;
    for (char c : in) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

} // namespace

std::string render_svg(const std::vector<SpectralCurve>& curves, SpectrumType style)
{
    if (curves.empty())
        throw Error(ErrorCode::EmptyCurve, "render_svg needs at least one curve");
    std::vector<const PointMatrix<double>*> sets;
    for (const auto& c : curves) {
        if (c.empty())
            throw Error(ErrorCode::EmptyCurve, "curve '" + c.name + "' has no points");
        sets.push_back(&c.points);
    }
    const bool sticks = is_stick_type(style);
    auto norm = fit_unit_square<double>(sets);
    if (sticks) {
        // keep the zero line inside the frame so sticks have a foot
        double y_lo = norm.y_offset, y_hi = norm.y_offset + 1.0 / norm.y_scale;
        if (y_lo > 0.0 || y_hi < 0.0) {
            y_lo = std::min(y_lo, 0.0);
            y_hi = std::max(y_hi, 0.0);
            norm.y_offset = y_lo;
            norm.y_scale = 1.0 / (y_hi - y_lo);
        }
    }

    const double plot_w = kSvgWidth - kLeft - kRight;
    const double plot_h = kSvgHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - norm.x_offset) * norm.x_scale * plot_w; };
    auto py = [&](double y) { return kTop + plot_h - (y - norm.y_offset) * norm.y_scale * plot_h; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSvgWidth << "\" height=\"" << kSvgHeight
        << "\" viewBox=\"0 0 " << kSvgWidth << ' ' << kSvgHeight << "\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << kSvgWidth << "\" height=\"" << kSvgHeight << "\" fill=\"white\"/>\n";
    svg << "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n";
    svg << "<line x1=\"" << fmt2(kLeft) << "\" y1=\"" << fmt2(kTop + plot_h) << "\" x2=\"" << fmt2(kLeft + plot_w)
        << "\" y2=\"" << fmt2(kTop + plot_h) << "\"/>\n";
    svg << "<line x1=\"" << fmt2(kLeft) << "\" y1=\"" << fmt2(kTop) << "\" x2=\"" << fmt2(kLeft) << "\" y2=\""
        << fmt2(kTop + plot_h) << "\"/>\n";
    svg << "</g>\n";

    const double x_lo = norm.x_offset, x_hi = norm.x_offset + 1.0 / norm.x_scale;
    const double y_lo = norm.y_offset, y_hi = norm.y_offset + 1.0 / norm.y_scale;
    svg << "<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<text x=\"" << fmt2(kLeft) << "\" y=\"" << fmt2(kTop + plot_h + 18) << "\" text-anchor=\"start\">"
        << fmt2(x_lo) << "</text>\n";
    svg << "<text x=\"" << fmt2(kLeft + plot_w) << "\" y=\"" << fmt2(kTop + plot_h + 18) << "\" text-anchor=\"end\">"
        << fmt2(x_hi) << "</text>\n";
    svg << "<text x=\"" << fmt2(kLeft - 6) << "\" y=\"" << fmt2(kTop + plot_h) << "\" text-anchor=\"end\">" << fmt2(y_lo)
        << "</text>\n";
    svg << "<text x=\"" << fmt2(kLeft - 6) << "\" y=\"" << fmt2(kTop + 12) << "\" text-anchor=\"end\">" << fmt2(y_hi)
        << "</text>\n";
    svg << "</g>\n";
    const auto& first = curves.front();
    svg << "<text class=\"xlabel\" x=\"" << fmt2(kLeft + plot_w / 2) << "\" y=\"" << fmt2(kSvgHeight - 10.0)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" << xml_escape(first.x_label)
        << "</text>\n";
    svg << "<text class=\"ylabel\" x=\"16\" y=\"" << fmt2(kTop + plot_h / 2) << "\" transform=\"rotate(-90 16 "
        << fmt2(kTop + plot_h / 2) << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
        << xml_escape(first.y_label) << "</text>\n";

    for (std::size_t ci = 0; ci < curves.size(); ++ci) {
        const auto& c = curves[ci];
        const char* color = kPalette[ci % (sizeof kPalette / sizeof kPalette[0])];
        if (sticks) {
            svg << "<g class=\"sticks\" stroke=\"" << color << "\" stroke-width=\"1.5\">\n";
            for (Eigen::Index i = 0; i < c.size(); ++i) {
                if (c.points(i, 1) == 0.0)
                    continue;
                const std::string x = fmt2(px(c.points(i, 0)));
                svg << "<line class=\"stick\" x1=\"" << x << "\" y1=\"" << fmt2(py(0.0)) << "\" x2=\"" << x << "\" y2=\""
                    << fmt2(py(c.points(i, 1))) << "\"/>\n";
            }
            svg << "</g>\n";
        } else {
            svg << "<polyline class=\"trace\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
            for (Eigen::Index i = 0; i < c.size(); ++i) {
                if (i)
                    svg << ' ';
                svg << fmt2(px(c.points(i, 0))) << ',' << fmt2(py(c.points(i, 1)));
            }
            svg << "\"/>\n";
        }
    }
    svg << "</svg>\n";
    return svg.str();
}

} // namespace specfid
