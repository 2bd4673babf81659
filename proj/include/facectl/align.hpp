#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "facectl/geometry.hpp"
#include "facectl/keypoints.hpp"

namespace facectl {

// Least-squares similarity fit: argmin over (s, R, t) of
// sum_i |s R source_i + t - target_i|^2. With use_rotation unset R = I and
// only scale and translation are fitted.
//
// Throws DegenerateError for fewer than 3 points, zero source variance,
// collinear sources when fitting rotation, or a non-positive fitted scale.
SimilarityTransform estimate_similarity(std::span<const Point3> source, std::span<const Point3> target,
                                        bool use_rotation = true);

// Sum of squared residuals of transform applied to source against target.
double similarity_residual(const SimilarityTransform& transform, std::span<const Point3> source,
                           std::span<const Point3> target);

struct AlignOptions {
  std::size_t anchor = 0;                 // position of the neutral driving frame
  std::optional<std::vector<int>> fit_indices;  // defaults to topology retained features
  bool use_rotation = true;
};

// Fits the anchor frame to the reference on the fit indices and maps every
// driving frame through that single transform. Metadata is copied from the
// driving sequence. Throws BadAnchor, DegenerateError.
MotionSequence align_sequence(const MotionSequence& driving, const KeypointFrame& reference,
                              const FaceTopology& topo, const AlignOptions& options = {});

// Same fit as align_sequence, then re-bases expression offsets onto the
// reference geometry: out_f = reference + (aligned_f - aligned_anchor).
MotionSequence retarget_offsets(const MotionSequence& driving, const KeypointFrame& reference,
                                const FaceTopology& topo, const AlignOptions& options = {});

// The transform align_sequence would apply.
SimilarityTransform fit_alignment(const MotionSequence& driving, const KeypointFrame& reference,
                                  const FaceTopology& topo, const AlignOptions& options = {});

}  // namespace facectl
