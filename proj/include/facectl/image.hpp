#pragma once

#include <cstdint>
#include <vector>

#include "facectl/error.hpp"

namespace facectl {

// Interleaved 8-bit raster, row-major.
template <int Channels>
struct Image {
  static constexpr int kChannels = Channels;

  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  Image() = default;
  Image(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * Channels, fill) {}

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }

  std::size_t offset(int x, int y) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * Channels;
  }

  std::uint8_t& at(int x, int y, int c = 0) { return data[offset(x, y) + static_cast<std::size_t>(c)]; }
  std::uint8_t at(int x, int y, int c = 0) const { return data[offset(x, y) + static_cast<std::size_t>(c)]; }

  friend bool operator==(const Image&, const Image&) = default;
};

using RgbImage = Image<3>;
using GrayImage = Image<1>;

// Binary mask stored as a single-channel raster holding only 0 and 1.
using Mask = GrayImage;

// Real-valued single-channel image, values nominally in [0, 1].
struct FloatImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  FloatImage() = default;
  FloatImage(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  double& at(int x, int y) { return data[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)]; }
  double at(int x, int y) const { return data[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)]; }
};

inline std::size_t count_nonzero(const GrayImage& img) {
  std::size_t n = 0;
  for (auto v : img.data) n += v != 0;
  return n;
}

}  // namespace facectl
