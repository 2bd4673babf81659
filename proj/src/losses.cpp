#include "facectl/losses.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include <json.hpp>

#include "facectl/error.hpp"
#include "facectl/keypoints.hpp"

namespace facectl {
namespace {

constexpr char kMagic[4] = {'E', 'M', 'O', 'T'};
constexpr std::size_t kPairwiseBlock = 128;

void require_same_shape(const Tensor& a, const Tensor& b, std::string_view what) {
  if (a.shape() != b.shape()) {
    throw ShapeMismatch(std::string(what) + ": shapes " + shape_string(a.shape()) + " and " +
                        shape_string(b.shape()) + " differ");
  }
}

void require_mask_range(const Tensor& m, std::string_view name) {
  for (float v : m.data()) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw MaskRangeError(std::string(name) + " holds value " + std::to_string(v) + " outside [0,1]");
    }
  }
}

struct Masked {
  Tensor m_e, m_f;
};

Masked prepare_masks(const Tensor& z, const Tensor& z_hat, const Tensor& m_e, const Tensor& m_f) {
  require_same_shape(z, z_hat, "ffg_loss z/z_hat");
  require_mask_range(m_e, "expression mask");
  require_mask_range(m_f, "facial mask");
  return {broadcast_to(m_e, z.shape()), broadcast_to(m_f, z.shape())};
}

double mean_of(std::vector<double>& terms) {
  if (terms.empty()) return 0.0;
  return pairwise_sum(terms) / static_cast<double>(terms.size());
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(std::string_view in, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  return v;
}

}  // namespace

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

Tensor::Tensor(Shape shape, float fill) : shape_(std::move(shape)), data_(element_count(shape_), fill) {
  for (auto d : shape_) {
    if (d == 0) throw ShapeMismatch("tensor dims must be positive: " + shape_string(shape_));
  }
}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
  for (auto d : shape_) {
    if (d == 0) throw ShapeMismatch("tensor dims must be positive: " + shape_string(shape_));
  }
  if (data_.size() != element_count(shape_)) {
    throw ShapeMismatch("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                        shape_string(shape_));
  }
}

bool Tensor::all_finite() const {
  for (float v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Tensor broadcast_to(const Tensor& t, const Shape& target) {
  if (t.shape() == target) return t;
  const auto& src = t.shape();
  if (src.size() > target.size()) {
    throw ShapeMismatch("cannot broadcast " + shape_string(src) + " to " + shape_string(target));
  }
  const std::size_t lead = target.size() - src.size();
  // Source stride per target axis (0 where broadcast).
  std::vector<std::size_t> stride(target.size(), 0);
  std::size_t s = 1;
  for (std::size_t k = src.size(); k-- > 0;) {
    const std::size_t axis = lead + k;
    if (src[k] == target[axis]) {
      stride[axis] = s;
    } else if (src[k] != 1) {
      throw ShapeMismatch("cannot broadcast " + shape_string(src) + " to " + shape_string(target));
    }
    s *= src[k];
  }
  Tensor out(target);
  std::vector<std::size_t> idx(target.size(), 0);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = t[offset];
    for (std::size_t axis = target.size(); axis-- > 0;) {
      if (++idx[axis] < target[axis]) {
        offset += stride[axis];
        break;
      }
      offset -= stride[axis] * (target[axis] - 1);
      idx[axis] = 0;
    }
  }
  return out;
}

NoiseSchedule::NoiseSchedule(std::vector<double> alphabar) : alphabar_(std::move(alphabar)) {
  if (alphabar_.empty()) throw SchemaError("noise schedule is empty");
  for (std::size_t t = 0; t < alphabar_.size(); ++t) {
    const double a = alphabar_[t];
    if (!(a >= 0.0 && a <= 1.0)) throw SchemaError("noise schedule value outside [0,1] at t=" + std::to_string(t));
    if (t > 0 && a > alphabar_[t - 1]) throw SchemaError("noise schedule increases at t=" + std::to_string(t));
  }
}

NoiseSchedule NoiseSchedule::scaled_linear(std::size_t steps, double beta_start, double beta_end) {
  std::vector<double> out(steps);
  double prod = 1.0;
  const double lo = std::sqrt(beta_start), hi = std::sqrt(beta_end);
  for (std::size_t t = 0; t < steps; ++t) {
    const double r = steps > 1 ? static_cast<double>(t) / static_cast<double>(steps - 1) : 0.0;
    const double root = lo + (hi - lo) * r;
    prod *= 1.0 - root * root;
    out[t] = prod;
  }
  return NoiseSchedule(std::move(out));
}

NoiseSchedule NoiseSchedule::linear(std::size_t steps, double beta_start, double beta_end) {
  std::vector<double> out(steps);
  double prod = 1.0;
  for (std::size_t t = 0; t < steps; ++t) {
    const double r = steps > 1 ? static_cast<double>(t) / static_cast<double>(steps - 1) : 0.0;
    prod *= 1.0 - (beta_start + (beta_end - beta_start) * r);
    out[t] = prod;
  }
  return NoiseSchedule(std::move(out));
}

double NoiseSchedule::alphabar(std::size_t t) const {
  if (t >= alphabar_.size()) {
    throw TimestepOutOfRange("timestep " + std::to_string(t) + " outside schedule of " +
                             std::to_string(alphabar_.size()) + " steps");
  }
  return alphabar_[t];
}

Tensor forward_diffuse(const Tensor& z0, const Tensor& eps, double alphabar) {
  require_same_shape(z0, eps, "forward_diffuse");
  if (!(alphabar >= 0.0 && alphabar <= 1.0)) throw SchemaError("alphabar outside [0,1]");
  const double signal = std::sqrt(alphabar);
  const double noise = std::sqrt(1.0 - alphabar);
  Tensor out(z0.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double v;
    if (noise == 0.0) {
      v = signal * z0[i];
    } else if (signal == 0.0) {
      v = noise * eps[i];
    } else {
      v = signal * z0[i] + noise * eps[i];
    }
    out[i] = static_cast<float>(v);
  }
  return out;
}

Tensor forward_diffuse(const Tensor& z0, const Tensor& eps, std::size_t t, const NoiseSchedule& schedule) {
  return forward_diffuse(z0, eps, schedule.alphabar(t));
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= kPairwiseBlock) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double ldm_loss(const Tensor& eps_true, const Tensor& eps_pred) {
  require_same_shape(eps_true, eps_pred, "ldm_loss");
  std::vector<double> terms(eps_true.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const double d = static_cast<double>(eps_true[i]) - static_cast<double>(eps_pred[i]);
    terms[i] = d * d;
  }
  return mean_of(terms);
}

std::string_view to_string(FfgMode mode) {
  return mode == FfgMode::SumInsideNorm ? "sum-inside-norm" : "sum-of-norms";
}

FfgMode parse_ffg_mode(std::string_view name) {
  if (name == "sum-inside-norm") return FfgMode::SumInsideNorm;
  if (name == "sum-of-norms") return FfgMode::SumOfNorms;
  throw SchemaError("unknown ffg mode '" + std::string(name) + "'");
}

double ffg_loss(const Tensor& z, const Tensor& z_hat, const Tensor& m_e, const Tensor& m_f, FfgMode mode) {
  const auto masks = prepare_masks(z, z_hat, m_e, m_f);
  const std::size_t n = z.size();
  if (mode == FfgMode::SumInsideNorm) {
    std::vector<double> terms(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = static_cast<double>(z[i]) - static_cast<double>(z_hat[i]);
      const double w = static_cast<double>(masks.m_e[i]) + static_cast<double>(masks.m_f[i]);
      terms[i] = (w * d) * (w * d);
    }
    return mean_of(terms);
  }
  std::vector<double> expr(n), face(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(z[i]) - static_cast<double>(z_hat[i]);
    const double e = static_cast<double>(masks.m_e[i]) * d;
    const double f = static_cast<double>(masks.m_f[i]) * d;
    expr[i] = e * e;
    face[i] = f * f;
  }
  return mean_of(expr) + mean_of(face);
}

LossReport ffg_report(const Tensor& z, const Tensor& z_hat, const Tensor& m_e, const Tensor& m_f, FfgMode mode) {
  LossReport report;
  report.mode = mode;
  report.has_ldm = false;
  report.ffg = ffg_loss(z, z_hat, m_e, m_f, mode);

  const auto masks = prepare_masks(z, z_hat, m_e, m_f);
  std::vector<double> expr_only, face_only, both;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double d = static_cast<double>(z[i]) - static_cast<double>(z_hat[i]);
    const bool in_e = masks.m_e[i] > 0.0f;
    const bool in_f = masks.m_f[i] > 0.0f;
    if (in_e && in_f) {
      both.push_back(d * d);
    } else if (in_e) {
      expr_only.push_back(d * d);
    } else if (in_f) {
      face_only.push_back(d * d);
    }
  }
  auto& b = report.breakdown;
  b.expression_only_count = expr_only.size();
  b.facial_only_count = face_only.size();
  b.overlap_count = both.size();
  b.expression_only = mean_of(expr_only);
  b.facial_only = mean_of(face_only);
  b.overlap = mean_of(both);
  report.total = report.ffg;
  return report;
}

LossReport total_loss(const Tensor& eps_true, const Tensor& eps_pred, const Tensor& z, const Tensor& z_hat,
                      const Tensor& m_e, const Tensor& m_f, FfgMode mode) {
  LossReport report = ffg_report(z, z_hat, m_e, m_f, mode);
  report.ldm = ldm_loss(eps_true, eps_pred);
  report.has_ldm = true;
  report.total = report.ldm + report.ffg;
  return report;
}

std::string LossReport::to_json() const {
  nlohmann::json doc;
  doc["ldm"] = ldm;
  doc["has_ldm"] = has_ldm;
  doc["ffg"] = ffg;
  doc["total"] = total;
  doc["mode"] = std::string(to_string(mode));
  doc["breakdown"] = {
      {"expression_only", breakdown.expression_only},
      {"facial_only", breakdown.facial_only},
      {"overlap", breakdown.overlap},
      {"expression_only_count", breakdown.expression_only_count},
      {"facial_only_count", breakdown.facial_only_count},
      {"overlap_count", breakdown.overlap_count},
  };
  return doc.dump(2);
}

Tensor mask_tensor(const Mask& mask) {
  std::vector<float> data(mask.data.size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = mask.data[i] != 0 ? 1.0f : 0.0f;
  return Tensor({1, static_cast<std::size_t>(mask.height), static_cast<std::size_t>(mask.width)}, std::move(data));
}

Tensor mask_tensor(const FloatImage& soft) {
  std::vector<float> data(soft.data.begin(), soft.data.end());
  return Tensor({1, static_cast<std::size_t>(soft.height), static_cast<std::size_t>(soft.width)}, std::move(data));
}

std::string encode_tensor(const Tensor& t) {
  std::string out(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(t.rank()));
  for (auto d : t.shape()) put_u32(out, static_cast<std::uint32_t>(d));
  out.reserve(out.size() + 4 * t.size());
  for (float v : t.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

Tensor decode_tensor(std::string_view bytes) {
  if (bytes.size() < 8 || bytes.substr(0, 4) != std::string_view(kMagic, 4)) {
    throw FormatError("tensor: missing EMOT magic");
  }
  const std::uint32_t rank = get_u32(bytes, 4);
  if (bytes.size() < 8 + 4 * static_cast<std::size_t>(rank)) throw FormatError("tensor: truncated header");
  Shape shape(rank);
  std::size_t count = 1;
  for (std::uint32_t k = 0; k < rank; ++k) {
    shape[k] = get_u32(bytes, 8 + 4 * k);
    if (shape[k] == 0) throw FormatError("tensor: zero dimension");
    count *= shape[k];
  }
  const std::size_t header = 8 + 4 * static_cast<std::size_t>(rank);
  if (bytes.size() != header + 4 * count) {
    throw FormatError("tensor: payload is " + std::to_string(bytes.size() - header) + " bytes, shape " +
                      shape_string(shape) + " needs " + std::to_string(4 * count));
  }
  std::vector<float> data(count);
  for (std::size_t i = 0; i < count; ++i) data[i] = std::bit_cast<float>(get_u32(bytes, header + 4 * i));
  return Tensor(std::move(shape), std::move(data));
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) { write_text_file(path, encode_tensor(t)); }

Tensor read_tensor(const std::filesystem::path& path) {
  try {
    return decode_tensor(read_text_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace facectl
