#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "facectl/image.hpp"

namespace facectl {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);

// Dense row-major float32 array.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(Shape shape, std::vector<float> data);  // throws ShapeMismatch on length mismatch

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }
  float operator[](std::size_t i) const { return data_[i]; }
  float& operator[](std::size_t i) { return data_[i]; }

  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<float> data_;
};

std::size_t element_count(const Shape& shape);

// Expands `t` to `target` under trailing-aligned broadcasting (each source
// dim equals the target dim or is 1). Throws ShapeMismatch.
Tensor broadcast_to(const Tensor& t, const Shape& target);

// Cumulative signal level abar_t per timestep: non-increasing, in [0, 1].
class NoiseSchedule {
 public:
  explicit NoiseSchedule(std::vector<double> alphabar);  // throws SchemaError on invalid values

  // Stable Diffusion's "scaled_linear" betas: sqrt-spaced from beta_start to beta_end.
  static NoiseSchedule scaled_linear(std::size_t steps = 1000, double beta_start = 0.00085, double beta_end = 0.012);
  static NoiseSchedule linear(std::size_t steps = 1000, double beta_start = 1e-4, double beta_end = 0.02);

  std::size_t steps() const { return alphabar_.size(); }
  double alphabar(std::size_t t) const;  // throws TimestepOutOfRange
  std::span<const double> values() const { return alphabar_; }

 private:
  std::vector<double> alphabar_;
};

// sqrt(abar_t) * z0 + sqrt(1 - abar_t) * eps, elementwise. A term whose
// coefficient is zero is skipped, so abar = 1 returns z0 and abar = 0
// returns eps bit for bit.
Tensor forward_diffuse(const Tensor& z0, const Tensor& eps, std::size_t t, const NoiseSchedule& schedule);
Tensor forward_diffuse(const Tensor& z0, const Tensor& eps, double alphabar);

// Reduction-order-stable sum (pairwise, blocks of 128).
double pairwise_sum(std::span<const double> values);

// Mean over all elements of (eps_true - eps_pred)^2.
double ldm_loss(const Tensor& eps_true, const Tensor& eps_pred);

enum class FfgMode {
  SumInsideNorm,  // mean of ((m_e + m_f) * (z - z_hat))^2, the literal form
  SumOfNorms,     // mean of (m_e * d)^2 + mean of (m_f * d)^2
};

std::string_view to_string(FfgMode mode);
FfgMode parse_ffg_mode(std::string_view name);  // throws SchemaError

// Masks broadcast to z's shape and must hold values in [0, 1]. Throws
// ShapeMismatch, MaskRangeError.
double ffg_loss(const Tensor& z, const Tensor& z_hat, const Tensor& m_e, const Tensor& m_f,
                FfgMode mode = FfgMode::SumInsideNorm);

// Mean squared latent difference inside each mask region (support = mask > 0).
struct LossBreakdown {
  double expression_only = 0.0;
  double facial_only = 0.0;
  double overlap = 0.0;
  std::size_t expression_only_count = 0;
  std::size_t facial_only_count = 0;
  std::size_t overlap_count = 0;
};

struct LossReport {
  double ldm = 0.0;
  double ffg = 0.0;
  double total = 0.0;
  bool has_ldm = true;
  FfgMode mode = FfgMode::SumInsideNorm;
  LossBreakdown breakdown;

  std::string to_json() const;
};

LossReport total_loss(const Tensor& eps_true, const Tensor& eps_pred, const Tensor& z, const Tensor& z_hat,
                      const Tensor& m_e, const Tensor& m_f, FfgMode mode = FfgMode::SumInsideNorm);

// FFG term and breakdown only; ldm is reported as absent (0).
LossReport ffg_report(const Tensor& z, const Tensor& z_hat, const Tensor& m_e, const Tensor& m_f,
                      FfgMode mode = FfgMode::SumInsideNorm);

// Mask / soft mask as a [1, H, W] tensor, ready to broadcast over channels.
Tensor mask_tensor(const Mask& mask);
Tensor mask_tensor(const FloatImage& soft);

// "EMOT" magic, u32 rank, rank x u32 dims, f32 payload; all little-endian.
std::string encode_tensor(const Tensor& t);
Tensor decode_tensor(std::string_view bytes);  // throws FormatError
void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

}  // namespace facectl
