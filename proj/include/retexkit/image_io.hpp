#pragma once

#include <filesystem>

#include "retexkit/image.hpp"

namespace retexkit {

// 8-bit PNG or binary PPM (P6), selected by extension. Result is RGB in [0, 1].
Image read_image(const std::filesystem::path& path);

// Writes 8-bit RGB (3 channels) or grayscale (1 channel) PNG; values are clamped and rounded.
void write_png(const std::filesystem::path& path, const Image& image);

// Mask PNG: a pixel is foreground iff its gray value is > 127. Color images use their luma.
Mask read_mask(const std::filesystem::path& path);

// Mask PNG with values {0, 255}.
void write_mask(const std::filesystem::path& path, const Mask& mask);

std::uint8_t to_byte(float v);

}  // namespace retexkit
