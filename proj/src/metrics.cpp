#include "facectl/metrics.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "facectl/error.hpp"

namespace facectl {
namespace {

std::array<double, kSsimWindow> gaussian_kernel() {
  std::array<double, kSsimWindow> k{};
  double sum = 0.0;
  constexpr int half = kSsimWindow / 2;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - half;
    k[static_cast<std::size_t>(i)] = std::exp(-(d * d) / (2.0 * kSsimSigma * kSsimSigma));
    sum += k[static_cast<std::size_t>(i)];
  }
  for (auto& v : k) v /= sum;
  return k;
}

// Separable "valid" Gaussian filter.
FloatImage filter_valid(const FloatImage& img, const std::array<double, kSsimWindow>& k) {
  const int w = img.width - kSsimWindow + 1;
  const int h = img.height - kSsimWindow + 1;
  FloatImage rows(w, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = 0; i < kSsimWindow; ++i) s += k[static_cast<std::size_t>(i)] * img.at(x + i, y);
      rows.at(x, y) = s;
    }
  }
  FloatImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = 0; i < kSsimWindow; ++i) s += k[static_cast<std::size_t>(i)] * rows.at(x, y + i);
      out.at(x, y) = s;
    }
  }
  return out;
}

FloatImage product(const FloatImage& a, const FloatImage& b) {
  FloatImage out(a.width, a.height);
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = a.data[i] * b.data[i];
  return out;
}

void check_same_slots(const Landmark2D& pred, const Landmark2D& gt) {
  if (pred.source != gt.source || pred.groups != gt.groups) {
    throw SlotMismatch("landmark frames have different point slots (" + std::to_string(pred.size()) + " vs " +
                       std::to_string(gt.size()) + ")");
  }
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(10);
  ss << v;
  return ss.str();
}

}  // namespace

double l1_metric(const RgbImage& a, const RgbImage& b) {
  if (a.width != b.width || a.height != b.height) throw ShapeMismatch("l1: image sizes differ");
  if (a.data.empty()) return 0.0;
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    sum += static_cast<std::uint64_t>(std::abs(static_cast<int>(a.data[i]) - static_cast<int>(b.data[i])));
  }
  return static_cast<double>(sum) / (255.0 * static_cast<double>(a.data.size()));
}

FloatImage to_luma(const RgbImage& img) {
  FloatImage out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      out.at(x, y) = (0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2)) / 255.0;
    }
  }
  return out;
}

FloatImage to_float(const GrayImage& img) {
  FloatImage out(img.width, img.height);
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = img.data[i] / 255.0;
  return out;
}

double ssim(const FloatImage& a, const FloatImage& b) {
  if (a.width != b.width || a.height != b.height) throw ShapeMismatch("ssim: image sizes differ");
  if (a.width < kSsimWindow || a.height < kSsimWindow) {
    throw TooSmall("ssim: images must be at least 11x11, got " + std::to_string(a.width) + "x" +
                   std::to_string(a.height));
  }
  static const auto kernel = gaussian_kernel();
  constexpr double c1 = (kSsimK1 * 1.0) * (kSsimK1 * 1.0);
  constexpr double c2 = (kSsimK2 * 1.0) * (kSsimK2 * 1.0);

  const FloatImage mu_a = filter_valid(a, kernel);
  const FloatImage mu_b = filter_valid(b, kernel);
  const FloatImage aa = filter_valid(product(a, a), kernel);
  const FloatImage bb = filter_valid(product(b, b), kernel);
  const FloatImage ab = filter_valid(product(a, b), kernel);

  double sum = 0.0;
  for (std::size_t i = 0; i < mu_a.data.size(); ++i) {
    const double ma = mu_a.data[i], mb = mu_b.data[i];
    const double var_a = aa.data[i] - ma * ma;
    const double var_b = bb.data[i] - mb * mb;
    const double cov = ab.data[i] - ma * mb;
    sum += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
  }
  return sum / static_cast<double>(mu_a.data.size());
}

double ssim(const RgbImage& a, const RgbImage& b) { return ssim(to_luma(a), to_luma(b)); }

double landmark_ap(const Landmark2D& pred, const Landmark2D& gt, double tau) {
  if (!(tau > 0.0)) throw SchemaError("landmark_ap: tau must be positive");
  check_same_slots(pred, gt);
  const double iod = distance(gt.eye_outer[0], gt.eye_outer[1]);
  if (!(iod > 0.0)) throw DegenerateError("landmark_ap: ground truth inter-ocular distance is zero");
  if (gt.size() == 0) return 1.0;
  std::size_t correct = 0;
  for (std::size_t s = 0; s < gt.size(); ++s) {
    if (distance(pred.points[s], gt.points[s]) <= tau * iod) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(gt.size());
}

double landmark_ap(const std::vector<Landmark2D>& pred, const std::vector<Landmark2D>& gt, double tau) {
  if (pred.size() != gt.size()) {
    throw LengthMismatch("landmark_ap: " + std::to_string(pred.size()) + " predicted frames vs " +
                         std::to_string(gt.size()) + " ground-truth frames");
  }
  if (gt.empty()) throw LengthMismatch("landmark_ap: no frames");
  double sum = 0.0;
  for (std::size_t f = 0; f < gt.size(); ++f) sum += landmark_ap(pred[f], gt[f], tau);
  return sum / static_cast<double>(gt.size());
}

std::string metrics_csv(const std::vector<FrameMetrics>& rows) {
  std::string out = "frame,l1,ssim,landmark_ap,lpips,fvd,id_similarity,iqa\n";
  for (const auto& r : rows) {
    out += r.frame + "," + fmt(r.l1) + "," + fmt(r.ssim) + "," + (r.landmark_ap ? fmt(*r.landmark_ap) : "") +
           ",,,,\n";
  }
  return out;
}

std::string metrics_summary_json(const std::vector<FrameMetrics>& rows) {
  nlohmann::json doc;
  double l1 = 0.0, s = 0.0, ap = 0.0;
  std::size_t ap_n = 0;
  for (const auto& r : rows) {
    l1 += r.l1;
    s += r.ssim;
    if (r.landmark_ap) {
      ap += *r.landmark_ap;
      ++ap_n;
    }
  }
  const double n = static_cast<double>(rows.size());
  doc["frames"] = rows.size();
  doc["l1"] = rows.empty() ? nlohmann::json(nullptr) : nlohmann::json(l1 / n);
  doc["ssim"] = rows.empty() ? nlohmann::json(nullptr) : nlohmann::json(s / n);
  doc["landmark_ap"] = ap_n == 0 ? nlohmann::json(nullptr) : nlohmann::json(ap / static_cast<double>(ap_n));
  for (const char* k : {"lpips", "fvd", "id_similarity", "iqa"}) doc[k] = nullptr;
  return doc.dump(2);
}

}  // namespace facectl
