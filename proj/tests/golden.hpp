#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "support.hpp"

namespace golden {

// FNV-1a over (name, bytes) of every file written by
//   facectl synth --frames 16 --seed 7 > seq.json
//   facectl pipeline --reference seq.json --driving seq.json --out-dir out
// frozen from the first verified run.
inline constexpr std::uint64_t kPipelineSynth16Seed7 = 0x02c31032bc8f4a16ULL;

inline std::uint64_t directory_digest(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& f : files) {
    h = support::fnv1a(f.filename().string(), h);
    h = support::fnv1a(support::slurp(f), h);
  }
  return h;
}

}  // namespace golden
