#include "facectl/scheduler.hpp"

#include <algorithm>
#include <map>

#include <json.hpp>

#include "facectl/error.hpp"
#include "facectl/rng.hpp"

namespace facectl {
namespace {

void pad_to(WindowJob& job, int window, bool pad_covered) {
  const int last = job.frames.back();
  while (static_cast<int>(job.frames.size()) < window) {
    job.frames.push_back(last);
    job.covered.push_back(pad_covered);
    job.padded.push_back(true);
  }
}

}  // namespace

std::string_view to_string(CoverStrategy s) {
  return s == CoverStrategy::EndpointsKept ? "endpoints-kept" : "independent-p";
}

std::string_view to_string(JobRole r) { return r == JobRole::Keyframe ? "keyframe" : "interpolation"; }

int CoveragePattern::covered_count() const {
  return static_cast<int>(std::count(covered.begin(), covered.end(), true));
}

CoveragePattern sample_training_coverage(int n_frames, std::uint64_t seed) {
  if (n_frames < 2) throw TooShort("coverage needs at least 2 frames, got " + std::to_string(n_frames));
  const CounterRng rng(seed);
  CoveragePattern p;
  p.n_frames = n_frames;
  p.covered.assign(static_cast<std::size_t>(n_frames), false);
  // counter 0 is the strategy coin, counter 1 + i the draw for frame i
  if (rng.coin(0)) {
    p.strategy = CoverStrategy::EndpointsKept;
    for (int i = 1; i + 1 < n_frames; ++i) p.covered[static_cast<std::size_t>(i)] = true;
  } else {
    p.strategy = CoverStrategy::IndependentHalf;
    for (int i = 0; i < n_frames; ++i) {
      p.covered[static_cast<std::size_t>(i)] = rng.coin(1 + static_cast<std::uint64_t>(i));
    }
  }
  return p;
}

GenerationPlan plan_inference(int total_frames, int window, int stride) {
  if (total_frames < 2) throw BadWindow("need at least 2 frames, got " + std::to_string(total_frames));
  if (window < 2 || window > total_frames) {
    throw BadWindow("window " + std::to_string(window) + " outside [2, " + std::to_string(total_frames) + "]");
  }
  if (stride == 0) stride = window - 1;
  if (stride < 1 || stride > window - 1) {
    throw BadStride("stride " + std::to_string(stride) + " outside [1, " + std::to_string(window - 1) + "]");
  }

  GenerationPlan plan;
  plan.total_frames = total_frames;
  plan.window = window;
  plan.stride = stride;

  if (total_frames == window) {
    WindowJob job;
    for (int f = 0; f < total_frames; ++f) {
      job.frames.push_back(f);
      job.covered.push_back(true);
      job.padded.push_back(false);
    }
    plan.keyframes = job.frames;
    plan.jobs.push_back(std::move(job));
    return plan;
  }

  for (int f = 0; f < total_frames; f += stride) plan.keyframes.push_back(f);
  if (plan.keyframes.back() != total_frames - 1) plan.keyframes.push_back(total_frames - 1);

  for (std::size_t start = 0; start < plan.keyframes.size(); start += static_cast<std::size_t>(window)) {
    WindowJob job;
    job.pass = 1;
    job.role = JobRole::Keyframe;
    const std::size_t end = std::min(plan.keyframes.size(), start + static_cast<std::size_t>(window));
    for (std::size_t k = start; k < end; ++k) {
      job.frames.push_back(plan.keyframes[k]);
      job.covered.push_back(true);
      job.padded.push_back(false);
    }
    pad_to(job, window, true);
    plan.jobs.push_back(std::move(job));
  }

  for (std::size_t k = 0; k + 1 < plan.keyframes.size(); ++k) {
    const int a = plan.keyframes[k];
    const int b = plan.keyframes[k + 1];
    if (b - a < 2) continue;
    WindowJob job;
    job.pass = 2;
    job.role = JobRole::Interpolation;
    for (int f = a; f <= b; ++f) {
      job.frames.push_back(f);
      job.covered.push_back(f != a && f != b);
      job.padded.push_back(false);
    }
    pad_to(job, window, false);
    plan.jobs.push_back(std::move(job));
  }
  return plan;
}

std::vector<std::string> validate_plan(const GenerationPlan& plan) {
  std::vector<std::string> v;
  const int T = plan.total_frames;
  const int W = plan.window;
  if (T < 1) v.push_back("total_frames must be positive");
  if (W < 2) v.push_back("window must be at least 2");

  std::vector<int> generated_count(static_cast<std::size_t>(std::max(T, 0)), 0);
  std::vector<int> generated_in_pass(static_cast<std::size_t>(std::max(T, 0)), 0);  // 0 = not yet
  int prev_pass = 0;

  for (std::size_t j = 0; j < plan.jobs.size(); ++j) {
    const auto& job = plan.jobs[j];
    const std::string name = "job " + std::to_string(j) + " (pass " + std::to_string(job.pass) + ")";
    if (job.pass < prev_pass) v.push_back(name + " follows a job of pass " + std::to_string(prev_pass));
    prev_pass = std::max(prev_pass, job.pass);

    if (static_cast<int>(job.frames.size()) != W || job.covered.size() != job.frames.size() ||
        job.padded.size() != job.frames.size()) {
      v.push_back(name + " window length " + std::to_string(job.frames.size()) + " != " + std::to_string(W));
      continue;
    }
    bool bad_index = false;
    for (int f : job.frames) {
      if (f < 0 || f >= T) {
        v.push_back(name + " references frame " + std::to_string(f) + " outside [0," + std::to_string(T) + ")");
        bad_index = true;
      }
    }
    if (bad_index) continue;

    std::vector<std::size_t> real;
    for (std::size_t s = 0; s < job.frames.size(); ++s) {
      if (!job.padded[s]) {
        if (!real.empty() && s != real.back() + 1) v.push_back(name + " has a real slot after padding");
        real.push_back(s);
      } else if (real.empty() || job.frames[s] != job.frames[real.back()]) {
        v.push_back(name + " padding does not repeat the last real frame");
      }
    }
    if (real.empty()) {
      v.push_back(name + " has no real frames");
      continue;
    }

    if (job.role == JobRole::Keyframe) {
      for (auto s : real) {
        if (!job.covered[s]) v.push_back(name + " keyframe slot " + std::to_string(s) + " is uncovered");
      }
    } else {
      if (real.size() < 2) v.push_back(name + " interpolation window needs two endpoints");
      for (std::size_t k = 1; k < real.size(); ++k) {
        if (job.frames[real[k]] != job.frames[real[k - 1]] + 1) {
          v.push_back(name + " interpolation frames are not contiguous");
          break;
        }
      }
      for (std::size_t k = 0; k < real.size(); ++k) {
        const bool endpoint = k == 0 || k + 1 == real.size();
        if (job.covered[real[k]] == endpoint) {
          v.push_back(name + " slot " + std::to_string(real[k]) +
                      (endpoint ? " is an endpoint but covered" : " is interior but uncovered"));
        }
      }
    }

    // Conditioning frames must come from a strictly earlier pass.
    for (auto s : real) {
      if (job.covered[s]) continue;
      const int f = job.frames[s];
      const int when = generated_in_pass[static_cast<std::size_t>(f)];
      if (when == 0 || when >= job.pass) {
        v.push_back(name + " conditions on frame " + std::to_string(f) + " before an earlier pass generates it");
      }
    }
    for (auto s : real) {
      if (!job.covered[s]) continue;
      const int f = job.frames[s];
      ++generated_count[static_cast<std::size_t>(f)];
      if (generated_in_pass[static_cast<std::size_t>(f)] == 0) generated_in_pass[static_cast<std::size_t>(f)] = job.pass;
    }
  }

  for (int f = 0; f < T; ++f) {
    const int n = generated_count[static_cast<std::size_t>(f)];
    if (n == 0) {
      v.push_back("frame " + std::to_string(f) + " never generated");
    } else if (n > 1) {
      v.push_back("frame " + std::to_string(f) + " generated " + std::to_string(n) + " times");
    }
  }
  return v;
}

std::string plan_to_json(const GenerationPlan& plan) {
  using nlohmann::json;
  json doc;
  doc["T"] = plan.total_frames;
  doc["W"] = plan.window;
  doc["stride"] = plan.stride;
  doc["keyframes"] = plan.keyframes;
  doc["jobs"] = json::array();
  for (const auto& job : plan.jobs) {
    doc["jobs"].push_back({{"pass", job.pass},
                           {"role", std::string(to_string(job.role))},
                           {"frames", job.frames},
                           {"covered", job.covered},
                           {"padded", job.padded}});
  }
  return doc.dump();
}

GenerationPlan plan_from_json(std::string_view text) {
  using nlohmann::json;
  GenerationPlan plan;
  try {
    const json doc = json::parse(text);
    plan.total_frames = doc.at("T").get<int>();
    plan.window = doc.at("W").get<int>();
    plan.stride = doc.value("stride", plan.window - 1);
    plan.keyframes = doc.value("keyframes", std::vector<int>{});
    for (const auto& j : doc.at("jobs")) {
      WindowJob job;
      job.pass = j.at("pass").get<int>();
      const auto role = j.at("role").get<std::string>();
      if (role == "keyframe") {
        job.role = JobRole::Keyframe;
      } else if (role == "interpolation") {
        job.role = JobRole::Interpolation;
      } else {
        throw SchemaError("plan: unknown job role '" + role + "'");
      }
      job.frames = j.at("frames").get<std::vector<int>>();
      job.covered = j.at("covered").get<std::vector<bool>>();
      job.padded = j.value("padded", std::vector<bool>(job.frames.size(), false));
      plan.jobs.push_back(std::move(job));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("plan: ") + e.what());
  }
  return plan;
}

}  // namespace facectl
