#pragma once

#include <string>
#include <vector>

#include "specfid/core/curve.hpp"
#include "specfid/core/spectrum_type.hpp"

namespace specfid {

inline constexpr int kSvgWidth = 800;
inline constexpr int kSvgHeight = 600;

/// Deterministic vector plot of one or more curves on a fixed 800×600 canvas.
/// Stick types (MS) draw one vertical segment per nonzero sample; every other
/// type draws one polyline per curve. Coordinates are printed with two
/// decimals, so identical input gives byte-identical output.
std::string render_svg(const std::vector<SpectralCurve>& curves, SpectrumType style);

} // namespace specfid
