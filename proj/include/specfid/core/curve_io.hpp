#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "specfid/core/curve.hpp"
#include "specfid/core/spectrum_type.hpp"
#include "specfid/core/subplot.hpp"

namespace specfid {

// JSON curve schema: {"name", "x_label", "y_label", "points": [[x, y], ...]}
void to_json(nlohmann::json& j, const SpectralCurve& c);
void from_json(const nlohmann::json& j, SpectralCurve& c);

// Subplot schema: {"subplot_id": "A", "lines": [curve, ...], "diagnostics": [...]}
void to_json(nlohmann::json& j, const Warning& w);
void to_json(nlohmann::json& j, const SubplotAnswer& s);
/// Also accepts a bare curve or array of curves (one unnamed subplot).
SubplotAnswer subplot_from_json(const nlohmann::json& j);

/// What a curve file yielded. Dataset files written by the generator also
/// carry the spectrum type, which the pipeline uses to pick stick handling.
struct CurveFile {
    std::vector<SpectralCurve> curves;
    std::optional<SpectrumType> type;
};

/// Accepts a single curve object, an array of curves, or an object with a
/// "curves" array (generator dataset files).
CurveFile curves_from_json(const nlohmann::json& j);

/// Two numeric columns, optional header row, comma/semicolon/tab/space separated.
SpectralCurve parse_csv_curve(const std::string& text, const std::string& name = {});

/// Dispatches on extension: .csv → CSV, anything else → JSON.
CurveFile load_curve_file(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace specfid
