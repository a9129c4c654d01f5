#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "specfid/core/curve.hpp"

namespace specfid {

/// One recoverable deviation found while reading or validating input.
struct Warning {
    std::string kind;
    std::size_t offset = 0; // byte offset into the source text, when known
    std::string message;
};

/// A named subplot holding the curves extracted from it.
struct SubplotAnswer {
    std::string subplot_id;
    std::vector<SpectralCurve> lines;
    std::vector<Warning> diagnostics;
};

} // namespace specfid
