#include "facectl/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "facectl/error.hpp"
#include "facectl/image_io.hpp"

namespace facectl {

std::string frame_filename(std::string_view prefix, std::size_t position, std::string_view ext) {
  char digits[32];
  std::snprintf(digits, sizeof digits, "%05zu", position);
  return std::string(prefix) + "_" + digits + "." + std::string(ext);
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1,
                                                      std::max<std::size_t>(count, 1));
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::size_t failed_at = count;
  std::exception_ptr failure;

  auto worker = [&]() {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

PipelineResult run_pipeline(const MotionSequence& driving, const KeypointFrame& reference, const FaceTopology& topo,
                            const std::filesystem::path& out_dir, const PipelineConfig& config) {
  validate_sequence(driving, topo);
  if (driving.frames.empty()) throw EmptyError("driving sequence has no frames");
  if (static_cast<int>(reference.points.size()) != topo.point_count) {
    throw LengthError("reference frame has " + std::to_string(reference.points.size()) + " points, topology expects " +
                      std::to_string(topo.point_count));
  }

  const MotionSequence aligned = config.retarget ? retarget_offsets(driving, reference, topo, config.align)
                                                 : align_sequence(driving, reference, topo, config.align);

  std::filesystem::create_directories(out_dir);
  const std::size_t n = aligned.frames.size();
  std::vector<std::array<std::filesystem::path, 3>> written(n);

  parallel_for(n, config.jobs, [&](std::size_t f) {
    const auto& frame = aligned.frames[f];
    try {
      const ControlFrame cf = render_control_frame(frame, topo, config.resolution, config.style);
      written[f] = {out_dir / frame_filename("lmk", f, config.image_format),
                    out_dir / frame_filename("mexp", f, config.image_format),
                    out_dir / frame_filename("mface", f, config.image_format)};
      write_image(written[f][0], cf.landmark_image);
      write_image(written[f][1], mask_to_gray(cf.expression_mask));
      write_image(written[f][2], mask_to_gray(cf.facial_mask));
    } catch (const Error& e) {
      throw Error(e.kind(), "frame " + std::to_string(frame.index) + ": " + e.what());
    }
  });

  PipelineResult result;
  for (const auto& triple : written) result.files.insert(result.files.end(), triple.begin(), triple.end());

  if (n >= 2) {
    const int window = std::min<int>(config.window, static_cast<int>(n));
    const int stride = config.stride == 0 ? 0 : std::min(config.stride, window - 1);
    result.plan = plan_inference(static_cast<int>(n), window, stride);
    const auto plan_path = out_dir / "plan.json";
    write_text_file(plan_path, plan_to_json(result.plan));
    result.files.push_back(plan_path);
  }
  return result;
}

}  // namespace facectl
