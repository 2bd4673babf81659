#include "facectl/raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <unordered_map>

#include "facectl/error.hpp"

namespace facectl {
namespace {

using Fixed = std::int64_t;

int round_px(double v) { return static_cast<int>(std::llround(v)); }

Fixed floor_div(Fixed a, Fixed b) {  // b > 0
  Fixed q = a / b;
  if ((a % b != 0) && (a < 0)) --q;
  return q;
}

Fixed ceil_div(Fixed a, Fixed b) {  // b > 0
  Fixed q = a / b;
  if ((a % b != 0) && (a > 0)) ++q;
  return q;
}

// Exact rational x-coordinate num / den, den > 0, in fixed units.
struct Crossing {
  Fixed num;
  Fixed den;
};

bool less(const Crossing& a, const Crossing& b) {
  return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
}

template <typename Plot>
void bresenham(int x0, int y0, int x1, int y1, Plot&& plot) {
  const int dx = std::abs(x1 - x0);
  const int dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1;
  const int sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    plot(x0, y0);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

template <typename Plot>
void disk(int cx, int cy, int radius, Plot&& plot) {
  const int r2 = radius * radius;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy <= r2) plot(cx + dx, cy + dy);
    }
  }
}

}  // namespace

int scaled_size(int at_512, Resolution res) {
  const double scale = static_cast<double>(std::min(res.width, res.height)) / kReferenceSize;
  return std::max(1, static_cast<int>(std::lround(at_512 * scale)));
}

void draw_line(RgbImage& img, int x0, int y0, int x1, int y1, Rgb color, int width) {
  const int lo = -(width - 1) / 2;
  const int hi = lo + width - 1;
  bresenham(x0, y0, x1, y1, [&](int x, int y) {
    for (int by = y + lo; by <= y + hi; ++by) {
      for (int bx = x + lo; bx <= x + hi; ++bx) {
        if (!img.contains(bx, by)) continue;
        img.at(bx, by, 0) = color.r;
        img.at(bx, by, 1) = color.g;
        img.at(bx, by, 2) = color.b;
      }
    }
  });
}

void stamp_disk(RgbImage& img, int cx, int cy, int radius, Rgb color) {
  disk(cx, cy, radius, [&](int x, int y) {
    if (!img.contains(x, y)) return;
    img.at(x, y, 0) = color.r;
    img.at(x, y, 1) = color.g;
    img.at(x, y, 2) = color.b;
  });
}

void stamp_disk(Mask& mask, int cx, int cy, int radius) {
  disk(cx, cy, radius, [&](int x, int y) {
    if (mask.contains(x, y)) mask.at(x, y) = 1;
  });
}

RgbImage render_landmark_image(const Landmark2D& lm, const FaceTopology& topo, const RenderStyle& style) {
  const Resolution res = lm.resolution;
  RgbImage img(res.width, res.height, 0);
  const int width = style.line_width.value_or(scaled_size(kLineWidthAt512, res));
  const int radius = style.pupil_radius.value_or(scaled_size(kPupilRadiusAt512, res));

  std::unordered_map<int, std::size_t> slot_of;
  for (std::size_t s = 0; s < lm.size(); ++s) {
    if (lm.source[s] >= 0) slot_of.emplace(lm.source[s], s);
  }
  for (const auto& chain : topo.chains) {
    for (std::size_t k = 1; k < chain.indices.size(); ++k) {
      auto a = slot_of.find(chain.indices[k - 1]);
      auto b = slot_of.find(chain.indices[k]);
      if (a == slot_of.end() || b == slot_of.end()) continue;
      const Pixel& pa = lm.points[a->second];
      const Pixel& pb = lm.points[b->second];
      draw_line(img, round_px(pa.u), round_px(pa.v), round_px(pb.u), round_px(pb.v), chain.color, width);
    }
  }
  for (std::size_t s = 0; s < lm.size(); ++s) {
    if (lm.groups[s] != group::kPupil) continue;
    stamp_disk(img, round_px(lm.points[s].u), round_px(lm.points[s].v), radius, topo.pupil_color);
  }
  return img;
}

Mask render_expression_mask(const Landmark2D& lm, int radius) {
  Mask mask(lm.resolution.width, lm.resolution.height, 0);
  for (const auto& p : lm.points) stamp_disk(mask, round_px(p.u), round_px(p.v), radius);
  return mask;
}

Mask fill_polygon(std::span<const Pixel> vertices, Resolution res) {
  if (vertices.size() < 3) throw DegenerateContour("contour needs at least 3 points");
  constexpr Fixed one = Fixed{1} << kSubpixelBits;

  std::vector<std::array<Fixed, 2>> v;
  v.reserve(vertices.size());
  for (const auto& p : vertices) {
    v.push_back({std::llround(p.u * one), std::llround(p.v * one)});
  }
  __int128 twice_area = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& a = v[i];
    const auto& b = v[(i + 1) % v.size()];
    twice_area += static_cast<__int128>(a[0]) * b[1] - static_cast<__int128>(b[0]) * a[1];
  }
  if (twice_area == 0) throw DegenerateContour("contour polygon has zero area");

  Mask mask(res.width, res.height, 0);
  auto mark_range = [&](int y, Fixed x_lo, Fixed x_hi) {  // pixels whose sample lies in [x_lo, x_hi] (fixed)
    Fixed first = std::max<Fixed>(ceil_div(x_lo, one), 0);
    Fixed last = std::min<Fixed>(floor_div(x_hi, one), res.width - 1);
    for (Fixed x = first; x <= last; ++x) mask.at(static_cast<int>(x), y) = 1;
  };

  std::vector<Crossing> crossings;
  for (int y = 0; y < res.height; ++y) {
    const Fixed sample_y = static_cast<Fixed>(y) * one;
    crossings.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      auto a = v[i];
      auto b = v[(i + 1) % v.size()];
      if (a[1] == b[1]) {
        if (a[1] == sample_y) mark_range(y, std::min(a[0], b[0]), std::max(a[0], b[0]));
        continue;
      }
      if (a[1] > b[1]) std::swap(a, b);
      if (sample_y < a[1] || sample_y > b[1]) continue;
      const Fixed den = b[1] - a[1];
      const Fixed num = a[0] * den + (sample_y - a[1]) * (b[0] - a[0]);
      // Sample exactly on the edge.
      if (num % (den * one) == 0) {
        const Fixed x = num / (den * one);
        if (x >= 0 && x < res.width) mask.at(static_cast<int>(x), y) = 1;
      }
      if (sample_y < b[1]) crossings.push_back({num, den});
    }
    std::sort(crossings.begin(), crossings.end(), less);
    for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
      const auto& lo = crossings[k];
      const auto& hi = crossings[k + 1];
      Fixed first = std::max<Fixed>(ceil_div(lo.num, lo.den * one), 0);
      Fixed last = std::min<Fixed>(floor_div(hi.num, hi.den * one), res.width - 1);
      for (Fixed x = first; x <= last; ++x) mask.at(static_cast<int>(x), y) = 1;
    }
  }
  return mask;
}

Mask render_facial_mask(const KeypointFrame& frame, const FaceTopology& topo, Resolution res) {
  const auto polygon = topo.contour_polygon();
  if (polygon.size() < 3) throw DegenerateContour("contour group has fewer than 3 points");
  std::vector<Pixel> pts;
  pts.reserve(polygon.size());
  for (int i : polygon) pts.push_back(project_point(frame, frame.points.at(static_cast<std::size_t>(i)), res));
  return fill_polygon(pts, res);
}

ControlFrame render_control_frame(const KeypointFrame& frame, const FaceTopology& topo, Resolution res,
                                  const RenderStyle& style) {
  const Landmark2D lm = project_frame(frame, topo, res);
  ControlFrame out;
  out.frame_index = frame.index;
  out.landmark_image = render_landmark_image(lm, topo, style);
  out.expression_mask = render_expression_mask(lm, style.dilate_radius.value_or(scaled_size(kDilateRadiusAt512, res)));
  out.facial_mask = render_facial_mask(frame, topo, res);
  return out;
}

Mask downsample_mask(const Mask& mask, int factor) {
  if (factor < 1) throw ResolutionError("downsample factor must be >= 1");
  const int w = (mask.width + factor - 1) / factor;
  const int h = (mask.height + factor - 1) / factor;
  Mask out(w, h, 0);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (mask.at(x, y) != 0) out.at(x / factor, y / factor) = 1;
    }
  }
  return out;
}

FloatImage box_average(const Mask& mask, int factor) {
  if (factor < 1) throw ResolutionError("downsample factor must be >= 1");
  const int w = (mask.width + factor - 1) / factor;
  const int h = (mask.height + factor - 1) / factor;
  FloatImage sum(w, h, 0.0);
  FloatImage count(w, h, 0.0);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      sum.at(x / factor, y / factor) += mask.at(x, y) != 0 ? 1.0 : 0.0;
      count.at(x / factor, y / factor) += 1.0;
    }
  }
  for (std::size_t i = 0; i < sum.data.size(); ++i) sum.data[i] /= count.data[i];
  return sum;
}

GrayImage mask_to_gray(const Mask& mask) {
  GrayImage out = mask;
  for (auto& v : out.data) v = v != 0 ? 255 : 0;
  return out;
}

}  // namespace facectl
