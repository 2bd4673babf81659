#include "facectl/align.hpp"

#include <string>

#include <Eigen/Dense>

#include "facectl/error.hpp"

namespace facectl {

void SimilarityTransform::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw DegenerateError("similarity: scale must be positive");
  const Eigen::Matrix3d gram = rotation * rotation.transpose();
  if (!gram.isApprox(Eigen::Matrix3d::Identity(), 1e-9) ||
      std::abs(rotation.determinant() - 1.0) > 1e-9) {
    throw DegenerateError("similarity: rotation is not a proper rotation");
  }
}

SimilarityTransform estimate_similarity(std::span<const Point3> source, std::span<const Point3> target,
                                        bool use_rotation) {
  if (source.size() != target.size()) {
    throw DegenerateError("estimate_similarity: source and target differ in length");
  }
  if (source.size() < 3) throw DegenerateError("estimate_similarity: need at least 3 points");

  const double n = static_cast<double>(source.size());
  Eigen::Vector3d mean_src = Eigen::Vector3d::Zero();
  Eigen::Vector3d mean_dst = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    mean_src += source[i].vec();
    mean_dst += target[i].vec();
  }
  mean_src /= n;
  mean_dst /= n;

  double var_src = 0.0;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();      // target x source^T
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();  // source x source^T
  for (std::size_t i = 0; i < source.size(); ++i) {
    const Eigen::Vector3d a = source[i].vec() - mean_src;
    const Eigen::Vector3d b = target[i].vec() - mean_dst;
    var_src += a.squaredNorm();
    cov += b * a.transpose();
    scatter += a * a.transpose();
  }
  var_src /= n;
  cov /= n;
  scatter /= n;

  const double magnitude = mean_src.squaredNorm() + 1.0;
  if (!(var_src > 1e-24 * magnitude)) throw DegenerateError("estimate_similarity: source has zero variance");

  SimilarityTransform out;
  if (use_rotation) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> spread(scatter, Eigen::EigenvaluesOnly);
    const auto& ev = spread.eigenvalues();  // ascending
    if (ev(1) <= 1e-12 * ev(2)) throw DegenerateError("estimate_similarity: source points are collinear");

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d reflect = Eigen::Matrix3d::Identity();
    if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) reflect(2, 2) = -1.0;
    out.rotation = svd.matrixU() * reflect * svd.matrixV().transpose();
    out.scale = (svd.singularValues().asDiagonal() * reflect).trace() / var_src;
  } else {
    out.rotation.setIdentity();
    out.scale = cov.trace() / var_src;
  }
  if (!(out.scale > 0.0)) throw DegenerateError("estimate_similarity: fitted scale is not positive");
  out.translation = mean_dst - out.scale * out.rotation * mean_src;
  return out;
}

double similarity_residual(const SimilarityTransform& transform, std::span<const Point3> source,
                           std::span<const Point3> target) {
  double sum = 0.0;
  for (std::size_t i = 0; i < source.size(); ++i) {
    Point3 d = transform.apply(source[i]) - target[i];
    sum += dot(d, d);
  }
  return sum;
}

SimilarityTransform fit_alignment(const MotionSequence& driving, const KeypointFrame& reference,
                                  const FaceTopology& topo, const AlignOptions& options) {
  if (options.anchor >= driving.frames.size()) {
    throw BadAnchor("anchor " + std::to_string(options.anchor) + " outside sequence of " +
                    std::to_string(driving.frames.size()) + " frames");
  }
  const auto& anchor = driving.frames[options.anchor];
  const std::vector<int> indices = options.fit_indices ? *options.fit_indices : topo.retained_indices();

  std::vector<Point3> src, dst;
  src.reserve(indices.size());
  dst.reserve(indices.size());
  for (int i : indices) {
    if (i < 0 || static_cast<std::size_t>(i) >= anchor.points.size() ||
        static_cast<std::size_t>(i) >= reference.points.size()) {
      throw IndexError("fit index " + std::to_string(i) + " outside frame");
    }
    src.push_back(anchor.points[static_cast<std::size_t>(i)]);
    dst.push_back(reference.points[static_cast<std::size_t>(i)]);
  }
  return estimate_similarity(src, dst, options.use_rotation);
}

MotionSequence align_sequence(const MotionSequence& driving, const KeypointFrame& reference,
                              const FaceTopology& topo, const AlignOptions& options) {
  const auto transform = fit_alignment(driving, reference, topo, options);
  MotionSequence out = driving;
  for (auto& frame : out.frames) {
    for (auto& p : frame.points) p = transform.apply(p);
  }
  return out;
}

MotionSequence retarget_offsets(const MotionSequence& driving, const KeypointFrame& reference,
                                const FaceTopology& topo, const AlignOptions& options) {
  MotionSequence aligned = align_sequence(driving, reference, topo, options);
  const std::vector<Point3> base = aligned.frames[options.anchor].points;
  if (reference.points.size() != base.size()) {
    throw LengthError("retarget: reference has " + std::to_string(reference.points.size()) + " points, driving has " +
                      std::to_string(base.size()));
  }
  for (auto& frame : aligned.frames) {
    for (std::size_t i = 0; i < frame.points.size(); ++i) {
      frame.points[i] = reference.points[i] + (frame.points[i] - base[i]);
    }
  }
  return aligned;
}

}  // namespace facectl
