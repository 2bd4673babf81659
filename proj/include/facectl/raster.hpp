#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "facectl/image.hpp"
#include "facectl/keypoints.hpp"
#include "facectl/projection.hpp"

namespace facectl {

// Style constants at the 512x512 reference resolution; scaled by
// min(w, h) / 512 and rounded, never below 1 px.
inline constexpr int kReferenceSize = 512;
inline constexpr int kLineWidthAt512 = 2;
inline constexpr int kPupilRadiusAt512 = 3;
inline constexpr int kDilateRadiusAt512 = 10;

// Polygon vertices are snapped to a 1/256 px grid before filling so the
// scanline fill runs on exact integers.
inline constexpr int kSubpixelBits = 8;

int scaled_size(int at_512, Resolution res);

struct RenderStyle {
  std::optional<int> line_width;      // default kLineWidthAt512, scaled
  std::optional<int> pupil_radius;    // default kPupilRadiusAt512, scaled
  std::optional<int> dilate_radius;   // default kDilateRadiusAt512, scaled
};

struct ControlFrame {
  RgbImage landmark_image;
  Mask expression_mask;  // M_e
  Mask facial_mask;      // M_f
  std::int64_t frame_index = 0;
};

// Bresenham line with a square brush of side `width` anchored at -(width-1)/2.
void draw_line(RgbImage& img, int x0, int y0, int x1, int y1, Rgb color, int width);

// Digital disk {(x,y) : (x-cx)^2 + (y-cy)^2 <= r^2}, clipped to the image.
void stamp_disk(RgbImage& img, int cx, int cy, int radius, Rgb color);
void stamp_disk(Mask& mask, int cx, int cy, int radius);

// Black background, topology chains between retained points as polylines in
// their chain colors, pupils as filled disks. No anti-aliasing.
RgbImage render_landmark_image(const Landmark2D& lm, const FaceTopology& topo, const RenderStyle& style = {});

// Union of digital disks of the given radius around every landmark point
// (pupils included). Centers are rounded to the nearest pixel.
Mask render_expression_mask(const Landmark2D& lm, int radius);

// Even-odd scanline fill of a closed polygon, boundary pixels included. A
// pixel (x, y) is sampled at the point (x, y). Throws DegenerateContour for
// fewer than 3 vertices or zero area.
Mask fill_polygon(std::span<const Pixel> vertices, Resolution res);

// Projects the contour (the one place contour points are used) in topology
// polygon order and fills it.
Mask render_facial_mask(const KeypointFrame& frame, const FaceTopology& topo, Resolution res);

ControlFrame render_control_frame(const KeypointFrame& frame, const FaceTopology& topo, Resolution res,
                                  const RenderStyle& style = {});

// Box-downsample by an integer factor; a block is set when any pixel in it is.
Mask downsample_mask(const Mask& mask, int factor);

// Box-downsample by an integer factor to the mean of each block in [0, 1].
FloatImage box_average(const Mask& mask, int factor);

// 0/1 mask -> 0/255 gray for viewing.
GrayImage mask_to_gray(const Mask& mask);

}  // namespace facectl
