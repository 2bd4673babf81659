#pragma once

#include <filesystem>

#include "facectl/image.hpp"

namespace facectl {

// PNG goes through libpng with a fixed compression level and no row
// filtering so output bytes depend only on pixel content. PPM (P6) and PGM
// (P5) are dependency-free fallbacks. Format is chosen by file extension.
void write_image(const std::filesystem::path& path, const RgbImage& img);
void write_image(const std::filesystem::path& path, const GrayImage& img);

// Reads PNG / PPM / PGM; grayscale inputs are expanded to RGB, alpha dropped.
RgbImage read_rgb_image(const std::filesystem::path& path);

bool is_image_path(const std::filesystem::path& path);

}  // namespace facectl
