#include "specfid/core/curve_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace specfid {

std::optional<SpectrumType> parse_spectrum_type(std::string_view text)
{
    std::string key;
    for (char c : text)
        if (c != '-' && c != '_' && c != ' ')
            key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    for (SpectrumType t : kAllSpectrumTypes) {
        std::string name;
        for (char c : to_string(t))
            name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        if (key == name)
            return t;
    }
    return std::nullopt;
}

void to_json(nlohmann::json& j, const SpectralCurve& c)
{
    nlohmann::json pts = nlohmann::json::array();
    for (Eigen::Index i = 0; i < c.size(); ++i)
        pts.push_back({c.points(i, 0), c.points(i, 1)});
    j = nlohmann::json{{"name", c.name}, {"x_label", c.x_label}, {"y_label", c.y_label}, {"points", std::move(pts)}};
}

void from_json(const nlohmann::json& j, SpectralCurve& c)
{
    if (!j.is_object() || !j.contains("points") || !j.at("points").is_array())
        throw Error(ErrorCode::InvalidInput, "curve object needs a \"points\" array");
    const auto& pts = j.at("points");
    c.points.resize(static_cast<Eigen::Index>(pts.size()), 2);
    Eigen::Index i = 0;
    for (const auto& p : pts) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
            throw Error(ErrorCode::InvalidInput, "point " + std::to_string(i) + " is not [x, y]");
        c.points(i, 0) = p[0].get<double>();
        c.points(i, 1) = p[1].get<double>();
        ++i;
    }
    c.name = j.value("name", std::string{});
    c.x_label = j.value("x_label", std::string{});
    c.y_label = j.value("y_label", std::string{});
}

void to_json(nlohmann::json& j, const Warning& w)
{
    j = nlohmann::json{{"kind", w.kind}, {"offset", w.offset}, {"message", w.message}};
}

void to_json(nlohmann::json& j, const SubplotAnswer& s)
{
    j = nlohmann::json{{"subplot_id", s.subplot_id}, {"lines", s.lines}, {"diagnostics", s.diagnostics}};
}

SubplotAnswer subplot_from_json(const nlohmann::json& j)
{
    SubplotAnswer s;
    if (j.is_object() && j.contains("lines")) {
        s.subplot_id = j.value("subplot_id", std::string{});
        for (const auto& l : j.at("lines"))
            s.lines.push_back(l.get<SpectralCurve>());
        return s;
    }
    s.lines = curves_from_json(j).curves;
    return s;
}

CurveFile curves_from_json(const nlohmann::json& j)
{
    CurveFile out;
    if (j.is_array()) {
        for (const auto& item : j)
            out.curves.push_back(item.get<SpectralCurve>());
    } else if (j.is_object() && j.contains("curves")) {
        for (const auto& item : j.at("curves"))
            out.curves.push_back(item.get<SpectralCurve>());
        if (j.contains("spec") && j.at("spec").contains("type"))
            out.type = parse_spectrum_type(j.at("spec").at("type").get<std::string>());
        else if (j.contains("type") && j.at("type").is_string())
            out.type = parse_spectrum_type(j.at("type").get<std::string>());
    } else {
        out.curves.push_back(j.get<SpectralCurve>());
    }
    return out;
}

namespace {

bool parse_double(std::string_view s, double& v)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    if (s.empty())
        return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

std::vector<std::string_view> split_fields(std::string_view line)
{
    const char* seps = line.find(',') != std::string_view::npos   ? ","
                       : line.find(';') != std::string_view::npos ? ";"
                       : line.find('\t') != std::string_view::npos ? "\t"
                                                                    : " ";
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (start <= line.size()) {
        std::size_t end = line.find_first_of(seps, start);
        if (end == std::string_view::npos)
            end = line.size();
        auto f = line.substr(start, end - start);
        if (!(seps[0] == ' ' && f.empty()))
            fields.push_back(f);
        start = end + 1;
    }
    return fields;
}

} // namespace

SpectralCurve parse_csv_curve(const std::string& text, const std::string& name)
{
    std::vector<std::pair<double, double>> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos)
            continue;
        auto fields = split_fields(line);
        double x = 0, y = 0;
        if (fields.size() >= 2 && parse_double(fields[0], x) && parse_double(fields[1], y)) {
            rows.emplace_back(x, y);
            continue;
        }
        if (rows.empty() && line_no == 1)
            continue; // header
        throw Error(ErrorCode::InvalidInput, "CSV line " + std::to_string(line_no) + " is not two numeric columns");
    }
    PointMatrix<double> pts(static_cast<Eigen::Index>(rows.size()), 2);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        pts(static_cast<Eigen::Index>(i), 0) = rows[i].first;
        pts(static_cast<Eigen::Index>(i), 1) = rows[i].second;
    }
    return SpectralCurve(std::move(pts), name);
}

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::InvalidInput, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::InvalidInput, "cannot write " + path.string());
    out << text;
}

CurveFile load_curve_file(const std::filesystem::path& path)
{
    const std::string text = read_text_file(path);
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".csv" || ext == ".tsv" || ext == ".txt") {
        CurveFile f;
        f.curves.push_back(parse_csv_curve(text, path.stem().string()));
        return f;
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::InvalidInput, path.string() + ": " + e.what());
    }
    CurveFile f = curves_from_json(j);
    for (std::size_t i = 0; i < f.curves.size(); ++i)
        if (f.curves[i].name.empty())
            f.curves[i].name = path.stem().string() + (f.curves.size() > 1 ? "#" + std::to_string(i) : "");
    return f;
}

} // namespace specfid
