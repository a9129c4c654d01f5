#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace specfid {

enum class SpectrumType { NMR, IR, XRD, Raman, MS, UVVis, XPS };

inline constexpr std::array<SpectrumType, 7> kAllSpectrumTypes = {
    SpectrumType::NMR, SpectrumType::IR, SpectrumType::XRD, SpectrumType::Raman,
    SpectrumType::MS,  SpectrumType::UVVis, SpectrumType::XPS,
};

constexpr std::string_view to_string(SpectrumType t) noexcept
{
    switch (t) {
    case SpectrumType::NMR: return "NMR";
    case SpectrumType::IR: return "IR";
    case SpectrumType::XRD: return "XRD";
    case SpectrumType::Raman: return "Raman";
    case SpectrumType::MS: return "MS";
    case SpectrumType::UVVis: return "UVVis";
    case SpectrumType::XPS: return "XPS";
    }
    return "?";
}

/// Case-insensitive; accepts "UV-Vis" as well as "UVVis".
std::optional<SpectrumType> parse_spectrum_type(std::string_view text);

/// Stick spectra are drawn as vertical segments and skip smoothing.
constexpr bool is_stick_type(SpectrumType t) noexcept { return t == SpectrumType::MS; }

} // namespace specfid
