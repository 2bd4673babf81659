#pragma once

#include <cstdint>

#include "facectl/keypoints.hpp"

namespace facectl {

// Motion parameters drawn from the seed. Exposed so tests can relate the
// generated geometry back to the phases that produced it.
struct SynthParams {
  double yaw_amp = 0.0, yaw_period = 1.0;      // radians, frames
  double pitch_amp = 0.0, pitch_period = 1.0;
  double roll_amp = 0.0, roll_period = 1.0;
  double blink_period = 1.0;
  double mouth_amp = 0.0, mouth_period = 1.0;  // normalized units
  double iris_amp = 0.0, iris_period = 1.0;    // fraction of socket width

  static SynthParams from_seed(std::uint64_t seed);

  double yaw(double t) const;
  double pitch(double t) const;
  double roll(double t) const;
  double blink(double t) const;   // 0 open .. 1 fully closed
  double mouth(double t) const;   // 0 closed .. 1 fully open
  double iris(double t) const;    // signed offset along inner->outer, fraction of socket width
};

// Neutral face plus seeded head rotation, blinks, mouth opening and iris
// sweeps. Frame 0 is always the neutral pose. Uses the topology's neutral
// layout when present, otherwise a generic layout derived from its groups.
MotionSequence synth_sequence(int n_frames, std::uint64_t seed, const FaceTopology& topo);

// The neutral layout used by synth_sequence.
std::vector<Point3> neutral_layout(const FaceTopology& topo);

}  // namespace facectl
