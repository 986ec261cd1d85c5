#pragma once

#include <string>

#include "spectraldip/image.hpp"

namespace spectraldip {

/// Reads an 8-bit PNG, PGM (P5) or PPM (P6) file into [0,1] channel-first
/// layout. Unsupported formats or bit depths raise std::runtime_error
/// naming the format.
Image load_image(const std::string& path);

/// Writes 8-bit PNG/PGM/PPM by file extension; values are clamped to [0,1]
/// and rounded half-to-even.
void save_image(const Image& image, const std::string& path);

}  // namespace spectraldip
