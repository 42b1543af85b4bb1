#pragma once

#include <string>

#include "sdp/image.hpp"

namespace sdp {

/// Reads binary PGM (P5) or PPM (P6), 8-bit only.
Image read_pnm(const std::string& path);

/// Writes P5 for 1-channel images, P6 for 3-channel. Values are rounded and clamped to [0, 255].
void write_pnm(const Image& img, const std::string& path);

/// 8-bit gray, gray+alpha, RGB or RGBA PNG. Alpha is dropped.
Image read_png(const std::string& path);
void write_png(const Image& img, const std::string& path);

/// Dispatches on extension: .png goes through libpng, everything else is treated as PNM.
Image read_image(const std::string& path);
void write_image(const Image& img, const std::string& path);

}  // namespace sdp
