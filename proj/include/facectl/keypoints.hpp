#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "facectl/geometry.hpp"

namespace facectl {

inline constexpr int kDefaultPointCount = 478;

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

enum class Eye { Left = 0, Right = 1 };

inline constexpr std::array<Eye, 2> kEyes = {Eye::Left, Eye::Right};

std::string_view to_string(Eye eye);

// Polyline through keypoint indices, drawn in one color.
struct Chain {
  std::string group;
  std::vector<int> indices;
  Rgb color;

  friend bool operator==(const Chain&, const Chain&) = default;
};

struct SocketCorners {
  int inner = 0;
  int outer = 0;
  int top = 0;
  int bottom = 0;

  friend bool operator==(const SocketCorners&, const SocketCorners&) = default;
};

namespace group {
inline constexpr std::string_view kContour = "contour";
inline constexpr std::string_view kBrows = "brows";
inline constexpr std::string_view kEyesLeft = "eyes_left";
inline constexpr std::string_view kEyesRight = "eyes_right";
inline constexpr std::string_view kNose = "nose";
inline constexpr std::string_view kLips = "lips";
inline constexpr std::string_view kIrisLeft = "iris_left";
inline constexpr std::string_view kIrisRight = "iris_right";
inline constexpr std::string_view kPupil = "pupil";

inline constexpr std::array<std::string_view, 8> kRequired = {
    kContour, kBrows, kEyesLeft, kEyesRight, kNose, kLips, kIrisLeft, kIrisRight};

std::string_view iris(Eye eye);
std::string_view eyelids(Eye eye);
}  // namespace group

// Which keypoint indices form the contour, the facial features, the eye
// sockets and the irises. All assignments come from data so that detectors
// with other index layouts can be plugged in.
struct FaceTopology {
  std::string id;
  int point_count = kDefaultPointCount;
  std::map<std::string, std::vector<int>, std::less<>> groups;
  std::vector<Chain> chains;
  std::array<SocketCorners, 2> sockets{};  // indexed by Eye
  Rgb pupil_color{255, 255, 255};
  // Optional template face used by the synthetic generator.
  std::vector<Point3> neutral;

  std::span<const int> group(std::string_view name) const;
  const SocketCorners& socket(Eye eye) const { return sockets[static_cast<int>(eye)]; }

  // Feature indices kept in the expression-aware landmark: every group except
  // the contour and the irises, in group-name order, without duplicates.
  std::vector<int> retained_indices() const;

  // Contour indices in polygon order: the first contour chain if one exists,
  // otherwise the contour group order. A closing repeat is dropped.
  std::vector<int> contour_polygon() const;

  // Throws SchemaError / IndexError / OverlapError on invariant violations.
  void validate() const;

  friend bool operator==(const FaceTopology&, const FaceTopology&) = default;
};

struct KeypointFrame {
  std::int64_t index = 0;
  std::vector<Point3> points;
  std::optional<std::array<double, 16>> transform;  // row-major, canonical -> head pose

  friend bool operator==(const KeypointFrame&, const KeypointFrame&) = default;
};

struct MotionSequence {
  std::string version = "1";
  std::string topology_id;
  double fps = 30.0;
  std::vector<KeypointFrame> frames;

  friend bool operator==(const MotionSequence&, const MotionSequence&) = default;
};

FaceTopology parse_topology(std::string_view json_text);
std::string serialize_topology(const FaceTopology& topo);

// The shipped 478-point face-mesh topology (compiled in from data/mp478.json).
const FaceTopology& default_topology();

MotionSequence parse_sequence(std::string_view json_text, const FaceTopology& topo);
std::string serialize_sequence(const MotionSequence& seq);

// Checks a sequence against its topology. Throws LengthError, TopologyMismatch,
// NonFiniteError or SchemaError.
void validate_sequence(const MotionSequence& seq, const FaceTopology& topo);

// Applies the frame's optional 4x4 transform to a canonical point.
Point3 apply_frame_transform(const KeypointFrame& frame, const Point3& p);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

FaceTopology load_topology(const std::filesystem::path& path);
MotionSequence load_sequence(const std::filesystem::path& path, const FaceTopology& topo);

}  // namespace facectl
