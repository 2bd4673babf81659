#include "facectl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "facectl/rng.hpp"

namespace facectl {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kBlinkClosure = 0.9;
constexpr double kMouthDrop = 0.045;
constexpr double kMouthLift = 0.008;

// Generic neutral face for topologies without a template layout.
std::vector<Point3> generic_layout(const FaceTopology& topo) {
  std::vector<Point3> pts(static_cast<std::size_t>(topo.point_count));
  std::vector<bool> placed(pts.size(), false);
  auto put = [&](int i, double x, double y, double z) {
    pts[static_cast<std::size_t>(i)] = {x, y, z};
    placed[static_cast<std::size_t>(i)] = true;
  };

  auto contour = topo.contour_polygon();
  for (std::size_t k = 0; k < contour.size(); ++k) {
    double a = -kPi / 2 + 2 * kPi * static_cast<double>(k) / static_cast<double>(contour.size());
    put(contour[k], 0.5 + 0.3 * std::cos(a), 0.52 + 0.4 * std::sin(a), 0.0);
  }
  for (Eye eye : kEyes) {
    double cx = eye == Eye::Left ? 0.62 : 0.38;
    double out_dir = eye == Eye::Left ? 1.0 : -1.0;
    constexpr double cy = 0.42, hw = 0.05, hh = 0.022;
    auto lids = topo.group(group::eyelids(eye));
    for (std::size_t k = 0; k < lids.size(); ++k) {
      double a = 2 * kPi * static_cast<double>(k) / static_cast<double>(lids.size());
      put(lids[k], cx + hw * std::cos(a), cy + hh * std::sin(a), -0.03);
    }
    const auto& s = topo.socket(eye);
    put(s.inner, cx - out_dir * hw, cy, -0.03);
    put(s.outer, cx + out_dir * hw, cy, -0.03);
    put(s.top, cx, cy - hh, -0.03);
    put(s.bottom, cx, cy + hh, -0.03);
    auto iris = topo.group(group::iris(eye));
    for (std::size_t k = 0; k < iris.size(); ++k) {
      double a = 2 * kPi * static_cast<double>(k) / static_cast<double>(iris.size());
      double r = iris.size() == 1 ? 0.0 : 0.012;
      put(iris[k], cx + r * std::cos(a), cy + r * std::sin(a), -0.035);
    }
  }
  std::size_t rest = static_cast<std::size_t>(std::count(placed.begin(), placed.end(), false));
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (placed[i]) continue;
    double r = 0.9 * std::sqrt((static_cast<double>(k) + 0.5) / static_cast<double>(rest));
    double a = static_cast<double>(k) * golden;
    pts[i] = {0.5 + 0.3 * r * std::cos(a), 0.52 + 0.4 * r * std::sin(a), -0.02};
    ++k;
  }
  return pts;
}

}  // namespace

SynthParams SynthParams::from_seed(std::uint64_t seed) {
  CounterRng rng(seed);
  SynthParams p;
  p.yaw_amp = rng.uniform(0, 0.08, 0.18);
  p.yaw_period = rng.uniform(1, 50.0, 90.0);
  p.pitch_amp = rng.uniform(2, 0.04, 0.10);
  p.pitch_period = rng.uniform(3, 40.0, 80.0);
  p.roll_amp = rng.uniform(4, 0.03, 0.08);
  p.roll_period = rng.uniform(5, 60.0, 100.0);
  p.blink_period = rng.uniform(6, 30.0, 50.0);
  p.mouth_amp = rng.uniform(7, 0.6, 1.0);
  p.mouth_period = rng.uniform(8, 20.0, 40.0);
  p.iris_amp = rng.uniform(9, 0.33, 0.40);
  p.iris_period = rng.uniform(10, 40.0, 70.0);
  return p;
}

double SynthParams::yaw(double t) const { return yaw_amp * std::sin(2 * kPi * t / yaw_period); }
double SynthParams::pitch(double t) const { return pitch_amp * std::sin(2 * kPi * t / pitch_period); }
double SynthParams::roll(double t) const { return roll_amp * std::sin(2 * kPi * t / roll_period); }
double SynthParams::blink(double t) const { return std::pow(std::sin(kPi * t / blink_period), 8); }
double SynthParams::mouth(double t) const {
  double s = std::sin(kPi * t / mouth_period);
  return mouth_amp * s * s;
}
double SynthParams::iris(double t) const { return iris_amp * std::sin(2 * kPi * t / iris_period); }

std::vector<Point3> neutral_layout(const FaceTopology& topo) {
  if (static_cast<int>(topo.neutral.size()) == topo.point_count) return topo.neutral;
  return generic_layout(topo);
}

MotionSequence synth_sequence(int n_frames, std::uint64_t seed, const FaceTopology& topo) {
  const auto params = SynthParams::from_seed(seed);
  const auto neutral = neutral_layout(topo);

  Point3 center;
  for (const auto& p : neutral) center = center + p;
  center = (1.0 / static_cast<double>(neutral.size())) * center;

  auto lips = topo.group(group::kLips);
  double lip_xmin = 1e300, lip_xmax = -1e300, lip_ymid = 0.0;
  for (int i : lips) {
    const auto& p = neutral[static_cast<std::size_t>(i)];
    lip_xmin = std::min(lip_xmin, p.x);
    lip_xmax = std::max(lip_xmax, p.x);
    lip_ymid += p.y;
  }
  if (!lips.empty()) lip_ymid /= static_cast<double>(lips.size());
  const double lip_width = std::max(lip_xmax - lip_xmin, 1e-9);

  MotionSequence seq;
  seq.topology_id = topo.id;
  seq.fps = 30.0;
  seq.frames.reserve(static_cast<std::size_t>(std::max(n_frames, 0)));

  for (int f = 0; f < n_frames; ++f) {
    const double t = f;
    std::vector<Point3> pts = neutral;

    const double closure = kBlinkClosure * params.blink(t);
    for (Eye eye : kEyes) {
      const auto& s = topo.socket(eye);
      const Point3 inner = neutral[static_cast<std::size_t>(s.inner)];
      const Point3 outer = neutral[static_cast<std::size_t>(s.outer)];
      for (int i : topo.group(group::eyelids(eye))) {
        auto& p = pts[static_cast<std::size_t>(i)];
        double dx = outer.x - inner.x;
        double a = std::abs(dx) > 1e-12 ? (p.x - inner.x) / dx : 0.5;
        double mid = inner.y + a * (outer.y - inner.y);
        p.y -= (p.y - mid) * closure;
      }
      const double width = norm(outer - inner);
      const double shift = params.iris(t) * width;
      for (int i : topo.group(group::iris(eye))) pts[static_cast<std::size_t>(i)].x += shift;
    }

    const double open = params.mouth(t);
    for (int i : lips) {
      auto& p = pts[static_cast<std::size_t>(i)];
      double w = std::sin(kPi * std::clamp((p.x - lip_xmin) / lip_width, 0.0, 1.0));
      if (p.y > lip_ymid) {
        p.y += open * kMouthDrop * w;
      } else if (p.y < lip_ymid) {
        p.y -= open * kMouthLift * w;
      }
    }

    // p + (R - I)(p - c): exact identity when all angles are zero.
    Eigen::Matrix3d rot = (Eigen::AngleAxisd(params.roll(t), Eigen::Vector3d::UnitZ()) *
                           Eigen::AngleAxisd(params.yaw(t), Eigen::Vector3d::UnitY()) *
                           Eigen::AngleAxisd(params.pitch(t), Eigen::Vector3d::UnitX()))
                              .toRotationMatrix();
    const Eigen::Matrix3d delta = rot - Eigen::Matrix3d::Identity();
    const Eigen::Vector3d c = center.vec();
    for (auto& p : pts) p = Point3::from(p.vec() + delta * (p.vec() - c));

    seq.frames.push_back({f, std::move(pts), std::nullopt});
  }
  return seq;
}

}  // namespace facectl
