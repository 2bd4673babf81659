#pragma once

#include <optional>
#include <string>
#include <vector>

#include "facectl/image.hpp"
#include "facectl/projection.hpp"

namespace facectl {

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;
inline constexpr double kDefaultApThreshold = 0.1;

// Mean absolute difference over all channels, values scaled to [0, 1].
double l1_metric(const RgbImage& a, const RgbImage& b);

// Luma (0.299, 0.587, 0.114) in [0, 1].
FloatImage to_luma(const RgbImage& img);
FloatImage to_float(const GrayImage& img);

// Structural similarity with an 11x11 Gaussian window (sigma 1.5), K1 0.01,
// K2 0.03, dynamic range 1, averaged over every window position that fits
// inside the image. Throws TooSmall, ShapeMismatch.
double ssim(const FloatImage& a, const FloatImage& b);
double ssim(const RgbImage& a, const RgbImage& b);

// Fraction of landmark slots within tau x inter-ocular distance of the
// ground truth, averaged over frames. The distance is measured between the
// ground-truth outer eye corners, so the metric is not symmetric. Throws
// LengthMismatch, SlotMismatch, DegenerateError (zero inter-ocular distance).
double landmark_ap(const std::vector<Landmark2D>& pred, const std::vector<Landmark2D>& gt,
                   double tau = kDefaultApThreshold);
double landmark_ap(const Landmark2D& pred, const Landmark2D& gt, double tau = kDefaultApThreshold);

struct FrameMetrics {
  std::string frame;
  double l1 = 0.0;
  double ssim = 0.0;
  std::optional<double> landmark_ap;
};

// CSV rows per frame plus placeholders for metrics that need pretrained
// networks (left empty so external values can be merged in).
std::string metrics_csv(const std::vector<FrameMetrics>& rows);
std::string metrics_summary_json(const std::vector<FrameMetrics>& rows);

}  // namespace facectl
