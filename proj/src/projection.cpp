#include "facectl/projection.hpp"

#include <algorithm>

#include <json.hpp>

#include "facectl/error.hpp"

namespace facectl {
namespace {

const Point3& at(const KeypointFrame& frame, int i) { return frame.points[static_cast<std::size_t>(i)]; }

Point3 iris_center(const KeypointFrame& frame, const FaceTopology& topo, Eye eye) {
  auto iris = topo.group(group::iris(eye));
  if (iris.empty()) throw DegenerateSocket("iris group for " + std::string(to_string(eye)) + " eye is empty");
  Point3 c;
  for (int i : iris) c = c + at(frame, i);
  return (1.0 / static_cast<double>(iris.size())) * c;
}

struct SocketAxes {
  Point3 inner, top;
  Point3 across;  // inner -> outer
  Point3 down;    // top -> bottom
};

SocketAxes socket_axes(const KeypointFrame& frame, const FaceTopology& topo, Eye eye) {
  const auto& s = topo.socket(eye);
  SocketAxes ax{at(frame, s.inner), at(frame, s.top), at(frame, s.outer) - at(frame, s.inner),
                at(frame, s.bottom) - at(frame, s.top)};
  if (dot(ax.across, ax.across) == 0.0 || dot(ax.down, ax.down) == 0.0) {
    throw DegenerateSocket(std::string(to_string(eye)) + " eye socket has coincident corners");
  }
  return ax;
}

void check_resolution(Resolution res) {
  if (res.width < kMinResolution || res.height < kMinResolution) {
    throw ResolutionError("resolution " + std::to_string(res.width) + "x" + std::to_string(res.height) +
                          " below minimum " + std::to_string(kMinResolution));
  }
}

}  // namespace

std::size_t Landmark2D::pupil_count() const {
  return static_cast<std::size_t>(std::count(groups.begin(), groups.end(), group::kPupil));
}

void Landmark2D::push(Pixel p, int src, std::string group_name) {
  points.push_back(p);
  source.push_back(src);
  groups.push_back(std::move(group_name));
}

Pixel project_point(const KeypointFrame& frame, const Point3& p, Resolution res) {
  const Point3 q = apply_frame_transform(frame, p);
  return {std::clamp(q.x * res.width, 0.0, static_cast<double>(res.width - 1)),
          std::clamp(q.y * res.height, 0.0, static_cast<double>(res.height - 1))};
}

PupilPosition pupil_relative(const KeypointFrame& frame, const FaceTopology& topo, Eye eye) {
  const auto ax = socket_axes(frame, topo, eye);
  const Point3 c = iris_center(frame, topo, eye);
  double u = dot(c - ax.inner, ax.across) / dot(ax.across, ax.across);
  double v = dot(c - ax.top, ax.down) / dot(ax.down, ax.down);
  return {std::clamp(u, 0.0, 1.0), std::clamp(v, 0.0, 1.0)};
}

std::array<Point3, 4> socket_quad(const KeypointFrame& frame, const FaceTopology& topo, Eye eye) {
  const auto ax = socket_axes(frame, topo, eye);
  const double aa = dot(ax.across, ax.across);
  const double dd = dot(ax.down, ax.down);
  const double ad = dot(ax.across, ax.down);
  const double det = aa * dd - ad * ad;
  if (!(det > 1e-12 * aa * dd)) {
    throw DegenerateSocket(std::string(to_string(eye)) + " eye socket axes are parallel");
  }
  const double offset = dot(ax.inner - ax.top, ax.down);
  // Point inner + alpha*across + beta*down whose relative coordinates are (u, v).
  auto corner = [&](double u, double v) {
    const double r0 = u * aa;
    const double r1 = v * dd - offset;
    const double alpha = (r0 * dd - ad * r1) / det;
    const double beta = (aa * r1 - ad * r0) / det;
    return ax.inner + alpha * ax.across + beta * ax.down;
  };
  return {corner(0, 0), corner(1, 0), corner(0, 1), corner(1, 1)};
}

SocketQuad project_socket(const KeypointFrame& frame, const FaceTopology& topo, Eye eye, Resolution res) {
  const auto quad = socket_quad(frame, topo, eye);
  return {project_point(frame, quad[0], res), project_point(frame, quad[1], res),
          project_point(frame, quad[2], res), project_point(frame, quad[3], res)};
}

Pixel bilinear(const SocketQuad& q, PupilPosition uv) {
  const double a = (1 - uv.u) * (1 - uv.v);
  const double b = uv.u * (1 - uv.v);
  const double c = (1 - uv.u) * uv.v;
  const double d = uv.u * uv.v;
  return {a * q[0].u + b * q[1].u + c * q[2].u + d * q[3].u,
          a * q[0].v + b * q[1].v + c * q[2].v + d * q[3].v};
}

Landmark2D place_pupils(Landmark2D lm, const std::array<PupilPosition, 2>& relative,
                        const std::array<SocketQuad, 2>& sockets) {
  for (Eye eye : kEyes) {
    const int e = static_cast<int>(eye);
    Pixel p = bilinear(sockets[e], relative[e]);
    p.u = std::clamp(p.u, 0.0, static_cast<double>(lm.resolution.width - 1));
    p.v = std::clamp(p.v, 0.0, static_cast<double>(lm.resolution.height - 1));
    lm.push(p, -1, std::string(group::kPupil));
  }
  return lm;
}

Landmark2D project_frame(const KeypointFrame& frame, const FaceTopology& topo, Resolution res) {
  check_resolution(res);
  if (static_cast<int>(frame.points.size()) != topo.point_count) {
    throw LengthError("frame " + std::to_string(frame.index) + " does not match topology point count");
  }
  Landmark2D lm;
  lm.resolution = res;

  std::vector<std::string_view> group_of(static_cast<std::size_t>(topo.point_count));
  for (const auto& [name, indices] : topo.groups) {
    for (int i : indices) {
      auto& slot = group_of[static_cast<std::size_t>(i)];
      if (slot.empty()) slot = name;
    }
  }
  for (int i : topo.retained_indices()) {
    lm.push(project_point(frame, at(frame, i), res), i, std::string(group_of[static_cast<std::size_t>(i)]));
  }

  const bool has_irises = !topo.group(group::kIrisLeft).empty() && !topo.group(group::kIrisRight).empty();
  if (has_irises) {
    std::array<PupilPosition, 2> rel;
    std::array<SocketQuad, 2> quads;
    for (Eye eye : kEyes) {
      const int e = static_cast<int>(eye);
      rel[e] = pupil_relative(frame, topo, eye);
      quads[e] = project_socket(frame, topo, eye, res);
      lm.eye_outer[e] = project_point(frame, at(frame, topo.socket(eye).outer), res);
    }
    lm = place_pupils(std::move(lm), rel, quads);
  }
  if (lm.points.empty()) throw EmptyError("frame " + std::to_string(frame.index) + " has no drawable points");
  return lm;
}

std::vector<Landmark2D> project_sequence(const MotionSequence& seq, const FaceTopology& topo, Resolution res) {
  std::vector<Landmark2D> out;
  out.reserve(seq.frames.size());
  for (const auto& frame : seq.frames) out.push_back(project_frame(frame, topo, res));
  return out;
}

std::string serialize_landmarks(const std::vector<Landmark2D>& frames) {
  using nlohmann::json;
  json doc;
  doc["frames"] = json::array();
  for (const auto& lm : frames) {
    json fr;
    fr["resolution"] = {lm.resolution.width, lm.resolution.height};
    json pts = json::array();
    for (const auto& p : lm.points) pts.push_back({p.u, p.v});
    fr["points"] = std::move(pts);
    fr["source"] = lm.source;
    fr["groups"] = lm.groups;
    fr["eye_outer"] = {{lm.eye_outer[0].u, lm.eye_outer[0].v}, {lm.eye_outer[1].u, lm.eye_outer[1].v}};
    doc["frames"].push_back(std::move(fr));
  }
  return doc.dump();
}

std::vector<Landmark2D> parse_landmarks(std::string_view json_text) {
  using nlohmann::json;
  std::vector<Landmark2D> out;
  try {
    json doc = json::parse(json_text);
    for (const auto& fr : doc.at("frames")) {
      Landmark2D lm;
      lm.resolution = {fr.at("resolution").at(0).get<int>(), fr.at("resolution").at(1).get<int>()};
      for (const auto& p : fr.at("points")) lm.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      lm.source = fr.at("source").get<std::vector<int>>();
      lm.groups = fr.at("groups").get<std::vector<std::string>>();
      for (std::size_t e = 0; e < 2; ++e) {
        lm.eye_outer[e] = {fr.at("eye_outer").at(e).at(0).get<double>(), fr.at("eye_outer").at(e).at(1).get<double>()};
      }
      if (lm.source.size() != lm.points.size() || lm.groups.size() != lm.points.size()) {
        throw SchemaError("landmarks: points, source and groups differ in length");
      }
      out.push_back(std::move(lm));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("landmarks: ") + e.what());
  }
  return out;
}

}  // namespace facectl
