#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace facectl {

inline constexpr int kDefaultWindow = 16;

enum class CoverStrategy { EndpointsKept, IndependentHalf };

std::string_view to_string(CoverStrategy s);

// Which latent frames of a training clip are covered (masked out and must be
// generated). covered[i] == true means frame i is covered.
struct CoveragePattern {
  int n_frames = 0;
  std::vector<bool> covered;
  CoverStrategy strategy = CoverStrategy::EndpointsKept;

  int covered_count() const;
};

// A fair seeded coin picks the strategy. EndpointsKept covers every frame
// except the first and last; IndependentHalf covers each frame with
// probability 0.5 independently (possibly none). Throws TooShort (n < 2).
CoveragePattern sample_training_coverage(int n_frames, std::uint64_t seed);

enum class JobRole { Keyframe, Interpolation };

std::string_view to_string(JobRole r);

struct WindowJob {
  int pass = 1;
  JobRole role = JobRole::Keyframe;
  std::vector<int> frames;     // global frame indices, length W
  std::vector<bool> covered;   // generated in this job (unless padded)
  std::vector<bool> padded;    // repeat of the last real slot, to be discarded
};

struct GenerationPlan {
  int total_frames = 0;
  int window = kDefaultWindow;
  int stride = kDefaultWindow - 1;
  std::vector<int> keyframes;
  std::vector<WindowJob> jobs;
};

// Keyframes first, then interpolation between consecutive keyframes.
//
// T <= W: one keyframe job generating every frame. Otherwise the keyframes
// {0, stride, 2*stride, ..., T-1} are generated in pass 1 in windows of W
// (all covered), then pass 2 runs one window per consecutive keyframe pair
// with the two keyframes uncovered and the frames between them covered.
// Short windows are right-padded with the last real index. Pairs with no
// frames between them need no job.
//
// Throws BadWindow (T < 2, W < 2 or W > T) and BadStride (stride outside [1, W-1]).
GenerationPlan plan_inference(int total_frames, int window = kDefaultWindow, int stride = 0);

// Exhaustive invariant check; returns human-readable violations (empty = ok).
std::vector<std::string> validate_plan(const GenerationPlan& plan);

std::string plan_to_json(const GenerationPlan& plan);
GenerationPlan plan_from_json(std::string_view text);  // throws SchemaError

}  // namespace facectl
