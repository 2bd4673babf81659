#include "facectl/keypoints.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "facectl/error.hpp"

namespace facectl {

extern const char* const kEmbeddedTopologyJson;  // generated from data/mp478.json

namespace {

using nlohmann::json;

const json& require(const json& obj, std::string_view key, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw SchemaError(std::string(where) + ": missing field '" + std::string(key) + "'");
  }
  return *it;
}

int as_int(const json& v, std::string_view where) {
  if (!v.is_number_integer()) throw SchemaError(std::string(where) + ": expected integer");
  return v.get<int>();
}

double as_real(const json& v, std::string_view where) {
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (s == "NaN" || s == "Infinity" || s == "-Infinity") {
      throw NonFiniteError(std::string(where) + ": non-finite value " + s);
    }
  }
  if (v.is_null()) throw NonFiniteError(std::string(where) + ": null coordinate");
  if (!v.is_number()) throw SchemaError(std::string(where) + ": expected number");
  return v.get<double>();
}

std::vector<int> as_int_list(const json& v, std::string_view where) {
  if (!v.is_array()) throw SchemaError(std::string(where) + ": expected array of integers");
  std::vector<int> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(as_int(e, where));
  return out;
}

// Python's json module emits bare NaN / Infinity tokens. Quote them so the
// strict parser accepts the document and the coordinate check can report them.
std::string quote_nonfinite_tokens(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_string = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      out.push_back(c);
      if (c == '\\' && i + 1 < text.size()) {
        out.push_back(text[++i]);
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
      out.push_back(c);
      continue;
    }
    bool matched = false;
    for (std::string_view tok : {"-Infinity", "Infinity", "NaN"}) {
      if (text.substr(i, tok.size()) == tok) {
        out += '"';
        out += tok;
        out += '"';
        i += tok.size() - 1;
        matched = true;
        break;
      }
    }
    if (!matched) out.push_back(c);
  }
  return out;
}

json parse_json(std::string_view text) {
  try {
    return json::parse(quote_nonfinite_tokens(text));
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what());
  }
}

Rgb parse_color(const json& v) {
  auto c = as_int_list(v, "chain color");
  if (c.size() != 3) throw SchemaError("chain color: expected [r,g,b]");
  for (int x : c) {
    if (x < 0 || x > 255) throw SchemaError("chain color: component out of 0..255");
  }
  return {static_cast<std::uint8_t>(c[0]), static_cast<std::uint8_t>(c[1]),
          static_cast<std::uint8_t>(c[2])};
}

Point3 parse_point(const json& v, std::string_view where) {
  if (!v.is_array() || v.size() != 3) throw SchemaError(std::string(where) + ": expected [x,y,z]");
  return {as_real(v[0], where), as_real(v[1], where), as_real(v[2], where)};
}

bool is_feature_group(std::string_view name) { return name != group::kContour; }

}  // namespace

std::string_view to_string(Eye eye) { return eye == Eye::Left ? "left" : "right"; }

std::string_view group::iris(Eye eye) { return eye == Eye::Left ? kIrisLeft : kIrisRight; }
std::string_view group::eyelids(Eye eye) { return eye == Eye::Left ? kEyesLeft : kEyesRight; }

std::span<const int> FaceTopology::group(std::string_view name) const {
  auto it = groups.find(name);
  if (it == groups.end()) return {};
  return it->second;
}

std::vector<int> FaceTopology::retained_indices() const {
  std::vector<int> out;
  std::set<int> seen;
  for (const auto& [name, indices] : groups) {
    if (name == group::kContour || name == group::kIrisLeft || name == group::kIrisRight) continue;
    for (int i : indices) {
      if (seen.insert(i).second) out.push_back(i);
    }
  }
  return out;
}

std::vector<int> FaceTopology::contour_polygon() const {
  std::vector<int> poly;
  for (const auto& chain : chains) {
    if (chain.group == group::kContour) {
      poly = chain.indices;
      break;
    }
  }
  if (poly.empty()) {
    auto g = group(group::kContour);
    poly.assign(g.begin(), g.end());
  }
  if (poly.size() > 1 && poly.front() == poly.back()) poly.pop_back();
  return poly;
}

void FaceTopology::validate() const {
  if (id.empty()) throw SchemaError("topology: empty id");
  if (point_count <= 0) throw SchemaError("topology: point_count must be positive");
  auto check_index = [&](int i, std::string_view where) {
    if (i < 0 || i >= point_count) {
      throw IndexError("topology: index " + std::to_string(i) + " in " + std::string(where) +
                       " outside [0," + std::to_string(point_count) + ")");
    }
  };
  for (auto name : group::kRequired) {
    if (!groups.contains(name)) throw SchemaError("topology: missing group '" + std::string(name) + "'");
  }
  for (const auto& [name, indices] : groups) {
    for (int i : indices) check_index(i, name);
  }
  for (Eye eye : kEyes) {
    if (group(group::iris(eye)).empty()) {
      throw SchemaError("topology: group '" + std::string(group::iris(eye)) + "' is empty");
    }
  }
  std::set<int> contour(group(group::kContour).begin(), group(group::kContour).end());
  for (const auto& [name, indices] : groups) {
    if (!is_feature_group(name)) continue;
    for (int i : indices) {
      if (contour.contains(i)) {
        throw OverlapError("topology: index " + std::to_string(i) + " is both contour and '" + name + "'");
      }
    }
  }
  for (const auto& chain : chains) {
    if (!groups.contains(chain.group)) {
      throw SchemaError("topology: chain references unknown group '" + chain.group + "'");
    }
    for (int i : chain.indices) check_index(i, "chain " + chain.group);
  }
  for (Eye eye : kEyes) {
    const auto& s = socket(eye);
    std::set<int> distinct{s.inner, s.outer, s.top, s.bottom};
    for (int i : distinct) check_index(i, "socket_corners");
    if (distinct.size() != 4) {
      throw SchemaError("topology: socket '" + std::string(to_string(eye)) + "' needs 4 distinct indices");
    }
  }
  if (!neutral.empty()) {
    if (static_cast<int>(neutral.size()) != point_count) {
      throw SchemaError("topology: neutral layout length differs from point_count");
    }
    for (const auto& p : neutral) {
      if (!p.finite()) throw NonFiniteError("topology: neutral layout contains a non-finite value");
    }
  }
}

FaceTopology parse_topology(std::string_view json_text) {
  json doc = parse_json(json_text);
  if (!doc.is_object()) throw SchemaError("topology: top level must be an object");
  FaceTopology topo;
  try {
    const auto& id = require(doc, "id", "topology");
    if (!id.is_string()) throw SchemaError("topology: id must be a string");
    topo.id = id.get<std::string>();
    topo.point_count = as_int(require(doc, "point_count", "topology"), "point_count");

    const auto& groups = require(doc, "groups", "topology");
    if (!groups.is_object()) throw SchemaError("topology: groups must be an object");
    for (const auto& [name, indices] : groups.items()) {
      topo.groups[name] = as_int_list(indices, "group " + name);
    }

    const auto& chains = require(doc, "chains", "topology");
    if (!chains.is_array()) throw SchemaError("topology: chains must be an array");
    for (const auto& c : chains) {
      if (!c.is_object()) throw SchemaError("topology: chain must be an object");
      Chain chain;
      const auto& g = require(c, "group", "chain");
      if (!g.is_string()) throw SchemaError("chain: group must be a string");
      chain.group = g.get<std::string>();
      chain.indices = as_int_list(require(c, "indices", "chain"), "chain indices");
      chain.color = parse_color(require(c, "color", "chain"));
      topo.chains.push_back(std::move(chain));
    }

    const auto& sockets = require(doc, "socket_corners", "topology");
    if (!sockets.is_object()) throw SchemaError("topology: socket_corners must be an object");
    for (Eye eye : kEyes) {
      auto corners = as_int_list(require(sockets, to_string(eye), "socket_corners"), "socket_corners");
      if (corners.size() != 4) throw SchemaError("socket_corners: expected 4 indices");
      topo.sockets[static_cast<int>(eye)] = {corners[0], corners[1], corners[2], corners[3]};
    }

    if (auto it = doc.find("pupil_color"); it != doc.end()) topo.pupil_color = parse_color(*it);
    if (auto it = doc.find("neutral"); it != doc.end()) {
      if (!it->is_array()) throw SchemaError("topology: neutral must be an array");
      for (const auto& p : *it) topo.neutral.push_back(parse_point(p, "neutral"));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("topology: ") + e.what());
  }
  topo.validate();
  return topo;
}

std::string serialize_topology(const FaceTopology& topo) {
  json doc;
  doc["id"] = topo.id;
  doc["point_count"] = topo.point_count;
  doc["groups"] = json::object();
  for (const auto& [name, indices] : topo.groups) doc["groups"][name] = indices;
  doc["chains"] = json::array();
  for (const auto& c : topo.chains) {
    doc["chains"].push_back({{"group", c.group},
                             {"indices", c.indices},
                             {"color", {c.color.r, c.color.g, c.color.b}}});
  }
  for (Eye eye : kEyes) {
    const auto& s = topo.socket(eye);
    doc["socket_corners"][std::string(to_string(eye))] = {s.inner, s.outer, s.top, s.bottom};
  }
  doc["pupil_color"] = {topo.pupil_color.r, topo.pupil_color.g, topo.pupil_color.b};
  if (!topo.neutral.empty()) {
    doc["neutral"] = json::array();
    for (const auto& p : topo.neutral) doc["neutral"].push_back({p.x, p.y, p.z});
  }
  return doc.dump();
}

const FaceTopology& default_topology() {
  static const FaceTopology topo = parse_topology(kEmbeddedTopologyJson);
  return topo;
}

void validate_sequence(const MotionSequence& seq, const FaceTopology& topo) {
  if (seq.topology_id != topo.id) {
    throw TopologyMismatch("sequence topology_id '" + seq.topology_id + "' does not match topology '" +
                           topo.id + "'");
  }
  if (!(seq.fps > 0.0) || !std::isfinite(seq.fps)) throw SchemaError("sequence: fps must be positive");
  for (std::size_t f = 0; f < seq.frames.size(); ++f) {
    const auto& frame = seq.frames[f];
    const std::string where = "frame " + std::to_string(frame.index);
    if (frame.index < 0) throw SchemaError(where + ": negative index");
    if (f > 0 && frame.index <= seq.frames[f - 1].index) {
      throw SchemaError(where + ": frame indices must be strictly increasing");
    }
    if (static_cast<int>(frame.points.size()) != topo.point_count) {
      throw LengthError(where + ": " + std::to_string(frame.points.size()) + " points, topology expects " +
                        std::to_string(topo.point_count));
    }
    for (const auto& p : frame.points) {
      if (!p.finite()) throw NonFiniteError(where + ": non-finite coordinate");
    }
    if (frame.transform) {
      for (double v : *frame.transform) {
        if (!std::isfinite(v)) throw NonFiniteError(where + ": non-finite transform entry");
      }
      const auto& m = *frame.transform;
      Eigen::Matrix3d upper;
      upper << m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10];
      if (upper.determinant() == 0.0) throw SchemaError(where + ": transform is singular");
    }
  }
}

MotionSequence parse_sequence(std::string_view json_text, const FaceTopology& topo) {
  json doc = parse_json(json_text);
  if (!doc.is_object()) throw SchemaError("sequence: top level must be an object");
  MotionSequence seq;
  try {
    const auto& version = require(doc, "version", "sequence");
    if (!version.is_string()) throw SchemaError("sequence: version must be a string");
    seq.version = version.get<std::string>();
    const auto& topo_id = require(doc, "topology_id", "sequence");
    if (!topo_id.is_string()) throw SchemaError("sequence: topology_id must be a string");
    seq.topology_id = topo_id.get<std::string>();
    seq.fps = as_real(require(doc, "fps", "sequence"), "fps");
    if (seq.topology_id != topo.id) {
      throw TopologyMismatch("sequence topology_id '" + seq.topology_id + "' does not match topology '" +
                             topo.id + "'");
    }

    const auto& frames = require(doc, "frames", "sequence");
    if (!frames.is_array()) throw SchemaError("sequence: frames must be an array");
    for (const auto& fr : frames) {
      if (!fr.is_object()) throw SchemaError("sequence: frame must be an object");
      KeypointFrame frame;
      const auto& index = require(fr, "index", "frame");
      if (!index.is_number_integer()) throw SchemaError("frame: index must be an integer");
      frame.index = index.get<std::int64_t>();
      const std::string where = "frame " + std::to_string(frame.index);
      const auto& points = require(fr, "points", where);
      if (!points.is_array()) throw SchemaError(where + ": points must be an array");
      frame.points.reserve(points.size());
      for (const auto& p : points) frame.points.push_back(parse_point(p, where));
      if (auto it = fr.find("transform"); it != fr.end() && !it->is_null()) {
        if (!it->is_array() || it->size() != 16) throw SchemaError(where + ": transform needs 16 values");
        std::array<double, 16> m{};
        for (std::size_t i = 0; i < 16; ++i) m[i] = as_real((*it)[i], where);
        frame.transform = m;
      }
      seq.frames.push_back(std::move(frame));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("sequence: ") + e.what());
  }
  std::stable_sort(seq.frames.begin(), seq.frames.end(),
                   [](const KeypointFrame& a, const KeypointFrame& b) { return a.index < b.index; });
  validate_sequence(seq, topo);
  return seq;
}

std::string serialize_sequence(const MotionSequence& seq) {
  json doc;
  doc["version"] = seq.version;
  doc["topology_id"] = seq.topology_id;
  doc["fps"] = seq.fps;
  doc["frames"] = json::array();
  for (const auto& frame : seq.frames) {
    json fr;
    fr["index"] = frame.index;
    json pts = json::array();
    for (const auto& p : frame.points) pts.push_back({p.x, p.y, p.z});
    fr["points"] = std::move(pts);
    if (frame.transform) fr["transform"] = *frame.transform;
    doc["frames"].push_back(std::move(fr));
  }
  return doc.dump();
}

Point3 apply_frame_transform(const KeypointFrame& frame, const Point3& p) {
  if (!frame.transform) return p;
  const auto& m = *frame.transform;
  return {m[0] * p.x + m[1] * p.y + m[2] * p.z + m[3],
          m[4] * p.x + m[5] * p.y + m[6] * p.z + m[7],
          m[8] * p.x + m[9] * p.y + m[10] * p.z + m[11]};
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

FaceTopology load_topology(const std::filesystem::path& path) {
  return parse_topology(read_text_file(path));
}

MotionSequence load_sequence(const std::filesystem::path& path, const FaceTopology& topo) {
  return parse_sequence(read_text_file(path), topo);
}

}  // namespace facectl
