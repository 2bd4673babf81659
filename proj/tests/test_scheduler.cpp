#include <doctest.h>

#include <algorithm>

#include "facectl/error.hpp"
#include "facectl/scheduler.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace facectl;

namespace {

bool contains_line(const std::vector<std::string>& v, const std::string& needle) {
  return std::any_of(v.begin(), v.end(), [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

void check_plan_independently(const GenerationPlan& plan) {
  const auto counts = oracle::simulate_plan(plan);
  REQUIRE(counts.size() == static_cast<std::size_t>(plan.total_frames));
  for (int c : counts) CHECK(c == 1);
  for (const auto& job : plan.jobs) {
    CHECK(job.frames.size() == static_cast<std::size_t>(plan.window));
    if (job.role == JobRole::Interpolation) {
      // Real slots are a contiguous run whose two ends are the only uncovered slots.
      std::size_t real = 0;
      while (real < job.frames.size() && !job.padded[real]) ++real;
      REQUIRE(real >= 3);
      for (std::size_t k = 0; k < real; ++k) {
        CHECK(job.frames[k] == job.frames[0] + static_cast<int>(k));
        CHECK(job.covered[k] == (k != 0 && k != real - 1));
      }
    }
  }
  // Interpolation windows overlap only at keyframes.
  std::vector<int> seen(static_cast<std::size_t>(plan.total_frames), 0);
  for (const auto& job : plan.jobs) {
    if (job.role != JobRole::Interpolation) continue;
    for (std::size_t k = 0; k < job.frames.size(); ++k)
      if (!job.padded[k]) ++seen[static_cast<std::size_t>(job.frames[k])];
  }
  for (int f = 0; f < plan.total_frames; ++f) {
    if (seen[static_cast<std::size_t>(f)] > 1) {
      CHECK(std::find(plan.keyframes.begin(), plan.keyframes.end(), f) != plan.keyframes.end());
    }
  }
}

}  // namespace

TEST_CASE("endpoints-kept pattern") {
  int found = 0;
  for (std::uint64_t seed = 0; seed < 200 && found < 20; ++seed) {
    const auto p = sample_training_coverage(16, seed);
    if (p.strategy != CoverStrategy::EndpointsKept) continue;
    ++found;
    CHECK(p.covered_count() == 14);
    CHECK_FALSE(p.covered[0]);
    CHECK_FALSE(p.covered[15]);
  }
  CHECK(found == 20);
}

TEST_CASE("coverage sampling is deterministic and rejects short clips") {
  for (std::uint64_t seed : {0ULL, 42ULL, ~0ULL}) {
    const auto a = sample_training_coverage(16, seed);
    const auto b = sample_training_coverage(16, seed);
    CHECK(a.covered == b.covered);
    CHECK(a.strategy == b.strategy);
  }
  CHECK_THROWS_AS(sample_training_coverage(1, 0), TooShort);
  CHECK_NOTHROW(sample_training_coverage(2, 0));
}

TEST_CASE("coverage statistics over 10000 seeds") {
  int independent = 0;
  long covered = 0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const auto p = sample_training_coverage(16, seed);
    if (p.strategy == CoverStrategy::IndependentHalf) {
      ++independent;
      covered += p.covered_count();
    }
  }
  const double split = independent / 10000.0;
  const double mean = static_cast<double>(covered) / independent;
  MESSAGE("split ", split, " mean coverage ", mean);
  CHECK(std::abs(split - 0.5) <= 0.02);
  CHECK(std::abs(mean - 8.0) <= 0.3);
}

TEST_CASE("plan examples") {
  SUBCASE("T=16, W=16") {
    const auto p = plan_inference(16, 16);
    REQUIRE(p.jobs.size() == 1);
    CHECK(p.jobs[0].role == JobRole::Keyframe);
    CHECK(std::all_of(p.jobs[0].covered.begin(), p.jobs[0].covered.end(), [](bool b) { return b; }));
    CHECK(validate_plan(p).empty());
  }
  SUBCASE("T=46, W=16, stride 15") {
    const auto p = plan_inference(46, 16, 15);
    CHECK(p.keyframes == std::vector<int>{0, 15, 30, 45});
    const auto interp = std::count_if(p.jobs.begin(), p.jobs.end(), [](const WindowJob& j) { return j.role == JobRole::Interpolation; });
    CHECK(interp == 3);
    std::vector<std::pair<int, int>> spans;
    for (const auto& j : p.jobs)
      if (j.role == JobRole::Interpolation) spans.emplace_back(j.frames.front(), j.frames.back());
    CHECK(spans == std::vector<std::pair<int, int>>{{0, 15}, {15, 30}, {30, 45}});
    CHECK(validate_plan(p).empty());
    check_plan_independently(p);
  }
  SUBCASE("T=2, W=2") {
    const auto p = plan_inference(2, 2);
    REQUIRE(p.jobs.size() == 1);
    CHECK(p.jobs[0].frames == std::vector<int>{0, 1});
  }
  SUBCASE("ragged tail is padded") {
    const auto p = plan_inference(40, 16);
    CHECK(p.keyframes == std::vector<int>{0, 15, 30, 39});
    const auto& last = p.jobs.back();
    CHECK(last.frames.front() == 30);
    CHECK(last.frames[9] == 39);
    CHECK(last.padded[10]);
    CHECK(last.frames.back() == 39);
    check_plan_independently(p);
  }
}

TEST_CASE("plan argument errors") {
  CHECK_THROWS_AS(plan_inference(1, 2), BadWindow);
  CHECK_THROWS_AS(plan_inference(10, 1), BadWindow);
  CHECK_THROWS_AS(plan_inference(10, 11), BadWindow);
  CHECK_THROWS_AS(plan_inference(10, 5, 5), BadStride);
  CHECK_THROWS_AS(plan_inference(10, 5, -1), BadStride);
}

TEST_CASE("plan sweep passes both validators") {
  auto g = support::rng(2025);
  for (int c = 0; c < 1000; ++c) {
    const int t = std::uniform_int_distribution<int>(2, 500)(g);
    const int w = std::uniform_int_distribution<int>(2, std::min(t, 64))(g);
    const int s = std::uniform_int_distribution<int>(1, w - 1)(g);
    const auto plan = plan_inference(t, w, s);
    const auto violations = validate_plan(plan);
    CHECK_MESSAGE(violations.empty(), "T=", t, " W=", w, " stride=", s, ": ", violations.empty() ? "" : violations[0]);
    check_plan_independently(plan);
  }
}

TEST_CASE("validator catches hand-built faults") {
  auto plan = plan_inference(46, 16, 15);

  SUBCASE("frame 7 never generated") {
    for (auto& job : plan.jobs)
      for (std::size_t k = 0; k < job.frames.size(); ++k)
        if (job.frames[k] == 7) job.covered[k] = false;
    CHECK(contains_line(validate_plan(plan), "frame 7 never generated"));
  }
  SUBCASE("interpolation before its keyframe pass") {
    std::rotate(plan.jobs.begin(), plan.jobs.begin() + 1, plan.jobs.end());
    const auto v = validate_plan(plan);
    CHECK_FALSE(v.empty());
    CHECK(contains_line(v, "before"));
  }
  SUBCASE("frame generated twice") {
    plan.jobs[1].covered[0] = true;
    CHECK(contains_line(validate_plan(plan), "frame 0 generated 2 times"));
  }
  SUBCASE("wrong window length") {
    plan.jobs[2].frames.pop_back();
    CHECK_FALSE(validate_plan(plan).empty());
  }
}

TEST_CASE("plan JSON round trip") {
  const auto plan = plan_inference(77, 12, 7);
  const auto back = plan_from_json(plan_to_json(plan));
  CHECK(plan_to_json(back) == plan_to_json(plan));
  CHECK(back.jobs.size() == plan.jobs.size());
  CHECK_THROWS_AS(plan_from_json("[1,2]"), SchemaError);
}
