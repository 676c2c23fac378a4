#include "drive4d/scene_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "drive4d/error.hpp"
#include "drive4d/log.hpp"

namespace drive4d {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::ValidationError, where + ": " + what);
}

void check_known(const json& j, std::initializer_list<const char*> known, const std::string& where,
                 std::vector<std::string>* warnings) {
  if (!warnings || !j.is_object()) return;
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      warnings->push_back(where + ": unknown field '" + key + "' ignored");
    }
  }
}

const json& field(const json& j, const char* name, const std::string& where) {
  if (!j.is_object() || !j.contains(name)) {
    throw Error(ErrorKind::ParseError, where + ": missing field '" + name + "'");
  }
  return j.at(name);
}

Vec3 vec3_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorKind::ParseError, where + ": expected 3-element array");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

void put_u16(std::uint8_t* p, std::uint16_t v) {
  p[0] = static_cast<std::uint8_t>(v);
  p[1] = static_cast<std::uint8_t>(v >> 8);
}
void put_u32(std::uint8_t* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}
void put_u64(std::uint8_t* p, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}
void put_f32(std::uint8_t* p, float f) {
  std::uint32_t v;
  std::memcpy(&v, &f, 4);
  put_u32(p, v);
}
std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}
std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}
float get_f32(const std::uint8_t* p) {
  const std::uint32_t v = get_u32(p);
  float f;
  std::memcpy(&f, &v, 4);
  return f;
}

}  // namespace

std::size_t SceneManifest::camera_index(const std::string& name) const {
  const auto it = std::find(rig.begin(), rig.end(), name);
  if (it == rig.end()) throw Error(ErrorKind::InvalidArgument, "unknown camera '" + name + "'");
  return static_cast<std::size_t>(it - rig.begin());
}

json to_json(const RigidTransform& t) {
  const auto& q = t.rotation();
  return {{"rotation", json::array({q.w(), q.x(), q.y(), q.z()})},
          {"translation", vec3_json(t.translation())}};
}

RigidTransform transform_from_json(const json& j) {
  const json& r = field(j, "rotation", "transform");
  if (!r.is_array() || r.size() != 4) {
    throw Error(ErrorKind::ParseError, "transform: rotation must be [w, x, y, z]");
  }
  const Vec3 t = vec3_from_json(field(j, "translation", "transform"), "transform.translation");
  try {
    return {r[0].get<double>(), r[1].get<double>(), r[2].get<double>(), r[3].get<double>(), t};
  } catch (const Error& e) {
    throw Error(ErrorKind::ValidationError, std::string("transform: ") + e.what());
  }
}

json to_json(const CameraIntrinsics& k) {
  return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"width", k.width},
          {"height", k.height}};
}

CameraIntrinsics intrinsics_from_json(const json& j) {
  CameraIntrinsics k;
  k.fx = field(j, "fx", "intrinsics").get<double>();
  k.fy = field(j, "fy", "intrinsics").get<double>();
  k.cx = field(j, "cx", "intrinsics").get<double>();
  k.cy = field(j, "cy", "intrinsics").get<double>();
  k.width = field(j, "width", "intrinsics").get<int>();
  k.height = field(j, "height", "intrinsics").get<int>();
  return k;
}

json to_json(const YawBox& b) {
  return {{"center", vec3_json(b.center)},
          {"half_extents", vec3_json(b.half_extents)},
          {"yaw", b.yaw}};
}

YawBox yaw_box_from_json(const json& j) {
  YawBox b;
  b.center = vec3_from_json(field(j, "center", "box"), "box.center");
  b.half_extents = vec3_from_json(field(j, "half_extents", "box"), "box.half_extents");
  b.yaw = j.value("yaw", 0.0);
  return b;
}

json manifest_to_json(const SceneManifest& m) {
  json frames = json::array();
  for (const auto& f : m.frames) {
    json cams = json::array();
    for (const auto& c : f.cameras) {
      cams.push_back({{"name", c.name},
                      {"intrinsics", to_json(c.intrinsics)},
                      {"extrinsic", to_json(c.extrinsic)},
                      {"image_path", c.image_path},
                      {"depth_path", c.depth_path}});
    }
    json frame = {{"index", f.index},
                  {"timestamp", f.timestamp},
                  {"ego_pose", to_json(f.ego_pose)},
                  {"cameras", cams}};
    if (!f.dynamic_boxes.empty()) {
      json boxes = json::array();
      for (const auto& b : f.dynamic_boxes) boxes.push_back(to_json(b));
      frame["dynamic_boxes"] = boxes;
    }
    frames.push_back(frame);
  }
  return {{"scene_id", m.scene_id}, {"rig", m.rig}, {"frames", frames}};
}

SceneManifest manifest_from_json(const json& j, std::vector<std::string>* warnings) {
  SceneManifest m;
  try {
    check_known(j, {"scene_id", "rig", "frames"}, "manifest", warnings);
    m.scene_id = field(j, "scene_id", "manifest").get<std::string>();
    m.rig = field(j, "rig", "manifest").get<std::vector<std::string>>();
    const json& frames = field(j, "frames", "manifest");
    if (!frames.is_array()) throw Error(ErrorKind::ParseError, "manifest: frames must be a list");
    for (std::size_t fi = 0; fi < frames.size(); ++fi) {
      const json& jf = frames[fi];
      const std::string where = "frame " + std::to_string(fi);
      check_known(jf, {"index", "timestamp", "ego_pose", "cameras", "dynamic_boxes"}, where,
                  warnings);
      FrameRecord f;
      f.index = field(jf, "index", where).get<int>();
      f.timestamp = field(jf, "timestamp", where).get<double>();
      try {
        f.ego_pose = transform_from_json(field(jf, "ego_pose", where));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::ValidationError) throw;
        invalid(where, std::string("ego_pose invalid: ") + e.what());
      }
      const json& cams = field(jf, "cameras", where);
      if (!cams.is_array()) throw Error(ErrorKind::ParseError, where + ": cameras must be a list");
      for (const json& jc : cams) {
        const std::string cw = where + " camera";
        check_known(jc, {"name", "intrinsics", "extrinsic", "image_path", "depth_path"}, cw,
                    warnings);
        CameraRecord c;
        c.name = field(jc, "name", cw).get<std::string>();
        c.intrinsics = intrinsics_from_json(field(jc, "intrinsics", cw));
        try {
          c.extrinsic = transform_from_json(field(jc, "extrinsic", cw));
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::ValidationError) throw;
          invalid(where + " camera " + c.name, std::string("extrinsic invalid: ") + e.what());
        }
        c.image_path = field(jc, "image_path", cw).get<std::string>();
        c.depth_path = field(jc, "depth_path", cw).get<std::string>();
        f.cameras.push_back(std::move(c));
      }
      if (jf.contains("dynamic_boxes")) {
        for (const json& jb : jf.at("dynamic_boxes")) f.dynamic_boxes.push_back(yaw_box_from_json(jb));
      }
      m.frames.push_back(std::move(f));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("manifest: ") + e.what());
  }
  return m;
}

void validate_manifest_structure(const SceneManifest& m) {
  if (m.rig.empty()) invalid("rig", "must list at least one camera");
  std::set<std::string> names(m.rig.begin(), m.rig.end());
  if (names.size() != m.rig.size()) invalid("rig", "camera names must be unique");
  if (m.frames.empty()) invalid("frames", "manifest has no frames");
  for (std::size_t i = 0; i < m.frames.size(); ++i) {
    const FrameRecord& f = m.frames[i];
    const std::string where = "frame " + std::to_string(i);
    if (f.index != static_cast<int>(i)) {
      invalid(where, "index " + std::to_string(f.index) + " does not equal its position");
    }
    if (!std::isfinite(f.timestamp)) invalid(where, "timestamp is not finite");
    if (i > 0 && !(f.timestamp > m.frames[i - 1].timestamp)) {
      invalid(where, "timestamps must be strictly increasing");
    }
    for (std::size_t c = 0; c < m.rig.size(); ++c) {
      if (c >= f.cameras.size()) invalid(where, "missing camera \"" + m.rig[c] + "\"");
      if (f.cameras[c].name != m.rig[c]) {
        invalid(where, "expected camera \"" + m.rig[c] + "\" at position " + std::to_string(c) +
                           ", found \"" + f.cameras[c].name + "\"");
      }
      try {
        f.cameras[c].intrinsics.validate();
      } catch (const Error& e) {
        invalid(where + " camera " + m.rig[c], e.what());
      }
    }
    if (f.cameras.size() > m.rig.size()) {
      invalid(where, "has " + std::to_string(f.cameras.size()) + " cameras, rig has " +
                         std::to_string(m.rig.size()));
    }
    for (const auto& b : f.dynamic_boxes) {
      if (!(b.half_extents.array() > 0.0).all()) invalid(where, "dynamic box extents must be positive");
    }
  }
}

void validate_manifest_assets(const SceneManifest& m) {
  for (const auto& f : m.frames) {
    const std::string where = "frame " + std::to_string(f.index);
    for (const auto& c : f.cameras) {
      for (const auto* rel : {&c.image_path, &c.depth_path}) {
        const auto path = m.resolve(*rel);
        if (!std::filesystem::is_regular_file(path)) {
          invalid(where + " camera " + c.name, "missing file " + path.string());
        }
        PngInfo info;
        try {
          info = read_png_info(path);
        } catch (const Error& e) {
          invalid(where + " camera " + c.name, e.what());
        }
        if (info.width != c.intrinsics.width || info.height != c.intrinsics.height) {
          invalid(where + " camera " + c.name,
                  path.string() + " is " + std::to_string(info.width) + "x" +
                      std::to_string(info.height) + ", intrinsics say " +
                      std::to_string(c.intrinsics.width) + "x" +
                      std::to_string(c.intrinsics.height));
        }
      }
    }
  }
}

SceneManifest load_manifest(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  std::vector<std::string> warnings;
  SceneManifest m = manifest_from_json(j, &warnings);
  m.warnings = std::move(warnings);
  m.root = path.parent_path();
  for (const auto& w : m.warnings) log::warn(path.string() + ": " + w);
  validate_manifest_structure(m);
  validate_manifest_assets(m);
  return m;
}

void save_manifest(const SceneManifest& m, const std::filesystem::path& path) {
  write_text_file(path, manifest_to_json(m).dump(2) + "\n");
}

DepthMap load_depth(const std::filesystem::path& path, const CameraIntrinsics& k) {
  DepthMap d = read_depth_png(path);
  if (d.width != k.width || d.height != k.height) {
    throw Error(ErrorKind::DimensionMismatch, path.string() + " size disagrees with intrinsics");
  }
  return d;
}

ColorImage load_image(const std::filesystem::path& path, const CameraIntrinsics& k) {
  ColorImage img = read_color_png(path);
  if (img.width != k.width || img.height != k.height) {
    throw Error(ErrorKind::DimensionMismatch, path.string() + " size disagrees with intrinsics");
  }
  return img;
}

std::vector<std::uint8_t> encode_cloud(std::span<const CloudRecord> records) {
  std::vector<std::uint8_t> out(kCloudHeaderBytes + records.size() * kCloudRecordBytes, 0);
  std::memcpy(out.data(), "STG4", 4);
  put_u32(out.data() + 4, kCloudVersion);
  put_u64(out.data() + 8, records.size());
  std::uint8_t* p = out.data() + kCloudHeaderBytes;
  for (const CloudRecord& r : records) {
    put_f32(p + 0, r.point.position[0]);
    put_f32(p + 4, r.point.position[1]);
    put_f32(p + 8, r.point.position[2]);
    p[12] = r.point.color[0];
    p[13] = r.point.color[1];
    p[14] = r.point.color[2];
    put_u16(p + 16, r.frame);
    p[18] = r.point.camera;
    p[19] = r.point.flags;
    p += kCloudRecordBytes;
  }
  return out;
}

std::vector<CloudRecord> decode_cloud(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw Error(ErrorKind::TruncatedFile, "cloud header truncated");
  if (std::memcmp(bytes.data(), "STG4", 4) != 0) {
    throw Error(ErrorKind::BadMagic, "cloud container magic is not STG4");
  }
  if (bytes.size() < kCloudHeaderBytes) throw Error(ErrorKind::TruncatedFile, "cloud header truncated");
  const std::uint32_t version = get_u32(bytes.data() + 4);
  if (version != kCloudVersion) {
    throw Error(ErrorKind::UnsupportedVersion, "cloud container version " + std::to_string(version));
  }
  const std::uint64_t count = get_u64(bytes.data() + 8);
  const std::uint64_t available = (bytes.size() - kCloudHeaderBytes) / kCloudRecordBytes;
  if (count > available) {
    throw Error(ErrorKind::TruncatedFile, "cloud declares " + std::to_string(count) +
                                              " records, file holds " + std::to_string(available));
  }
  std::vector<CloudRecord> records(count);
  const std::uint8_t* p = bytes.data() + kCloudHeaderBytes;
  for (auto& r : records) {
    r.point.position = {get_f32(p), get_f32(p + 4), get_f32(p + 8)};
    r.point.color = {p[12], p[13], p[14]};
    r.frame = get_u16(p + 16);
    r.point.camera = p[18];
    r.point.flags = p[19];
    p += kCloudRecordBytes;
  }
  return records;
}

std::vector<CloudRecord> flatten(std::span<const FramePointCloud> frames) {
  std::vector<CloudRecord> out;
  std::size_t total = 0;
  for (const auto& f : frames) total += f.size();
  out.reserve(total);
  for (const auto& f : frames) {
    if (f.frame_index < 0 || f.frame_index > 0xffff) {
      throw Error(ErrorKind::InvalidArgument, "frame index does not fit in u16");
    }
    for (const auto& p : f.points) out.push_back({p, static_cast<std::uint16_t>(f.frame_index)});
  }
  return out;
}

void save_cloud(std::span<const FramePointCloud> frames, const std::filesystem::path& path) {
  const auto records = flatten(frames);
  write_file_bytes(path, encode_cloud(records));
}

std::vector<FramePointCloud> load_cloud(const std::filesystem::path& path) {
  const auto records = decode_cloud(read_file_bytes(path));
  int max_frame = -1;
  for (const auto& r : records) max_frame = std::max<int>(max_frame, r.frame);
  std::vector<FramePointCloud> frames(static_cast<std::size_t>(max_frame + 1));
  for (std::size_t i = 0; i < frames.size(); ++i) {
    frames[i].frame_index = static_cast<int>(i);
    frames[i].tag = FrameTag::World;
  }
  for (const auto& r : records) frames[r.frame].points.push_back(r.point);
  return frames;
}

void export_ply(std::span<const FramePointCloud> frames, const std::filesystem::path& path,
                bool skip_removed) {
  std::size_t n = 0;
  for (const auto& f : frames) {
    for (const auto& p : f.points) n += (skip_removed && p.removed()) ? 0 : 1;
  }
  std::ostringstream os;
  os << "ply\nformat ascii 1.0\nelement vertex " << n
     << "\nproperty float x\nproperty float y\nproperty float z\n"
        "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  os.precision(9);
  for (const auto& f : frames) {
    for (const auto& p : f.points) {
      if (skip_removed && p.removed()) continue;
      os << p.position[0] << ' ' << p.position[1] << ' ' << p.position[2] << ' '
         << int(p.color[0]) << ' ' << int(p.color[1]) << ' ' << int(p.color[2]) << '\n';
    }
  }
  write_text_file(path, os.str());
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::IoError, "short write to " + path.string());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
}

}  // namespace drive4d
