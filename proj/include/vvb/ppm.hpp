#pragma once

#include <filesystem>

#include "vvb/stokes.hpp"

namespace vvb {

/// Binary PPM (P6). Row 0 of the image holds the most negative y, so it is
/// written last: the file's top scanline is the top of the physical scene.
void write_ppm(const RGBImage& img, const std::filesystem::path& path);

} // namespace vvb
