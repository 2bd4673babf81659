#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "facectl/align.hpp"
#include "facectl/keypoints.hpp"
#include "facectl/projection.hpp"
#include "facectl/raster.hpp"
#include "facectl/scheduler.hpp"

namespace facectl {

// Guidance scale used by the sampler this engine feeds. Recorded only; no
// sampling happens here.
inline constexpr double kGuidanceScale = 3.5;

struct PipelineConfig {
  Resolution resolution{512, 512};
  RenderStyle style;
  AlignOptions align;
  bool retarget = false;   // re-base expression offsets onto the reference
  int window = kDefaultWindow;
  int stride = 0;          // 0 = window - 1
  std::string image_format = "png";
  int jobs = 1;
};

struct PipelineResult {
  std::vector<std::filesystem::path> files;
  GenerationPlan plan;
};

// Runs frame-level work on `jobs` threads. Each index is processed by exactly
// one worker; the first failure (lowest index) is rethrown after all finish.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body);

// Aligns the driving sequence to the reference, then per frame projects,
// rasterizes and writes lmk_NNNNN / mexp_NNNNN / mface_NNNNN images (NNNNN =
// position in the sequence), plus plan.json for the whole sequence.
PipelineResult run_pipeline(const MotionSequence& driving, const KeypointFrame& reference, const FaceTopology& topo,
                            const std::filesystem::path& out_dir, const PipelineConfig& config = {});

std::string frame_filename(std::string_view prefix, std::size_t position, std::string_view ext);

}  // namespace facectl
