#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "specfid/core/subplot.hpp"

namespace specfid {

struct ParseDiagnostics {
    std::vector<Warning> warnings;
    std::size_t salvaged_points = 0;   // points that made it into a kept line
    std::size_t dropped_fragments = 0; // point-like fragments that could not be read
};

struct ParsedAnswer {
    std::vector<SubplotAnswer> subplots;
    ParseDiagnostics diagnostics;
};

/// Reads `<subplot X>` blocks of `<line i>[x,y],...</line>` runs.
///
/// Recoverable deviations each add one warning and parsing continues:
/// `<line1>` spacing, literal two-character "\n" escapes, ellipsis tokens
/// ("..." or "…"), truncated or malformed points, missing closing tags,
/// stray text, lines with fewer than two points (dropped), unsorted or
/// duplicate x (canonicalized), and gaps in line numbering.
/// `<line>` runs outside any subplot form an unnamed block. Throws
/// NoSubplotFound only when no block at all can be recognized.
ParsedAnswer parse_answer(std::string_view text);

/// The block whose id matches case-insensitively (a case mismatch adds a
/// label_case note); otherwise the sole block (subplot_fallback note).
/// Throws NoSubplotFound if neither.
const SubplotAnswer& select_subplot(const ParsedAnswer& parsed, std::string_view id, std::vector<Warning>* notes = nullptr);

/// Fixed two-decimal text of v, rounded half-to-even on the exact binary
/// value (so 2.675, stored as 2.67499999..., prints "2.67"). Never "-0.00".
std::string format_two_decimals(double v);

/// Canonical emission:
///   <subplot ID>\n<line 1>[x,y],[x,y]</line>\n...</subplot>
/// Lines are numbered from 1 in order. Throws EmptyAnswer for no lines or an
/// empty line.
std::string serialize_subplot(const SubplotAnswer& answer);

} // namespace specfid
