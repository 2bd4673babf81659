#pragma once

#include <array>
#include <string>
#include <vector>

#include "facectl/geometry.hpp"
#include "facectl/keypoints.hpp"

namespace facectl {

inline constexpr int kMinResolution = 16;

struct Resolution {
  int width = 512;
  int height = 512;

  friend bool operator==(const Resolution&, const Resolution&) = default;
};

// Socket quad corners in bilinear order: (u,v) = (0,0), (1,0), (0,1), (1,1),
// i.e. inner-top, outer-top, inner-bottom, outer-bottom.
using SocketQuad = std::array<Pixel, 4>;

// Expression-aware landmark: projected feature points with the contour
// removed and one pupil point per eye appended at the end.
struct Landmark2D {
  Resolution resolution;
  std::vector<Pixel> points;
  std::vector<int> source;          // keypoint index per slot, -1 for pupils
  std::vector<std::string> groups;  // group name per slot
  std::array<Pixel, 2> eye_outer{};  // projected outer eye corners, indexed by Eye

  std::size_t size() const { return points.size(); }
  std::size_t pupil_count() const;
  void push(Pixel p, int src, std::string group_name);

  friend bool operator==(const Landmark2D&, const Landmark2D&) = default;
};

struct PupilPosition {
  double u = 0.5;  // inner -> outer
  double v = 0.5;  // top -> bottom
};

// Canonical -> pixel: frame transform, drop z, scale [0,1]^2 to the image and
// clamp to [0, w-1] x [0, h-1].
Pixel project_point(const KeypointFrame& frame, const Point3& p, Resolution res);

// Relative iris position inside the eye socket, measured in the eye's own 3D
// frame so it is unchanged by any similarity transform of the face. The iris
// center is the mean of the iris group. Throws DegenerateSocket.
PupilPosition pupil_relative(const KeypointFrame& frame, const FaceTopology& topo, Eye eye);

// Parallelogram spanned by the socket axes in canonical space, in SocketQuad
// corner order. Bilinear interpolation of it at pupil_relative(...) returns
// the in-plane point with those relative coordinates.
std::array<Point3, 4> socket_quad(const KeypointFrame& frame, const FaceTopology& topo, Eye eye);

SocketQuad project_socket(const KeypointFrame& frame, const FaceTopology& topo, Eye eye, Resolution res);

Pixel bilinear(const SocketQuad& quad, PupilPosition uv);

// Appends one pupil per eye at the bilinear position in its projected socket.
Landmark2D place_pupils(Landmark2D lm, const std::array<PupilPosition, 2>& relative,
                        const std::array<SocketQuad, 2>& sockets);

// Throws ResolutionError (w or h < 16) and EmptyError (nothing to draw).
Landmark2D project_frame(const KeypointFrame& frame, const FaceTopology& topo, Resolution res);

std::vector<Landmark2D> project_sequence(const MotionSequence& seq, const FaceTopology& topo, Resolution res);

std::string serialize_landmarks(const std::vector<Landmark2D>& frames);
std::vector<Landmark2D> parse_landmarks(std::string_view json_text);

}  // namespace facectl
