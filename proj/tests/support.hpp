#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "facectl/keypoints.hpp"
#include "facectl/losses.hpp"

namespace support {

// Ten points: a triangle contour, four feature groups and one-point irises.
inline constexpr const char* kToyTopology = R"({
  "id": "toy10",
  "point_count": 10,
  "groups": {
    "contour": [0, 1, 2],
    "brows": [3],
    "eyes_left": [4, 5],
    "eyes_right": [6, 7],
    "nose": [8],
    "lips": [9],
    "iris_left": [3],
    "iris_right": [8]
  },
  "chains": [{"group": "lips", "indices": [9, 8], "color": [255, 0, 0]}],
  "socket_corners": {"left": [4, 5, 3, 9], "right": [6, 7, 8, 9]}
})";

inline std::string toy_sequence_json(int frames = 2) {
  std::ostringstream ss;
  ss << R"({"version":"1","topology_id":"toy10","fps":25.0,"frames":[)";
  for (int f = 0; f < frames; ++f) {
    if (f) ss << ',';
    ss << R"({"index":)" << f << R"(,"points":[)";
    for (int i = 0; i < 10; ++i) {
      if (i) ss << ',';
      ss << '[' << 0.1 + 0.08 * i << ',' << 0.2 + 0.05 * ((i * 7) % 10) + 0.001 * f << ',' << -0.01 * i << ']';
    }
    ss << "]}";
  }
  ss << "]}";
  return ss.str();
}

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline facectl::Tensor random_tensor(std::mt19937_64& g, const facectl::Shape& shape, double lo = -2.0,
                                     double hi = 2.0) {
  facectl::Tensor t(shape);
  for (auto& v : t.data()) v = static_cast<float>(uniform(g, lo, hi));
  return t;
}

inline facectl::Tensor random_binary(std::mt19937_64& g, const facectl::Shape& shape, double p = 0.5) {
  facectl::Tensor t(shape);
  std::bernoulli_distribution d(p);
  for (auto& v : t.data()) v = d(g) ? 1.0f : 0.0f;
  return t;
}

// Fresh empty directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("facectl_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr together
};

inline RunResult run(const std::string& command) {
  RunResult r;
  FILE* pipe = ::popen((command + " 2>&1").c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  const int status = ::pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// FNV-1a, 64-bit.
inline std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace support
