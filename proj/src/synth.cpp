#include "drive4d/synth.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "drive4d/error.hpp"
#include "drive4d/parallel.hpp"

namespace drive4d::synth {

using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Portable uniform [0, 1) from raw engine bits.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Vec3 uniform_in_ball(std::mt19937_64& rng, double radius) {
  for (;;) {
    const Vec3 v(2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0);
    if (v.squaredNorm() <= 1.0) return v * radius;
  }
}

// Shade factors for faces -x, +x, -y, +y, -z, +z.
constexpr double kFaceShade[6] = {0.70, 0.80, 0.90, 1.00, 0.60, 0.95};

Rgb shade(const Rgb& c, int face) {
  Rgb out;
  for (int i = 0; i < 3; ++i) out[i] = static_cast<std::uint8_t>(std::lround(c[i] * kFaceShade[face]));
  return out;
}

Vec3 vec3(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }
Rgb rgb(const json& j) {
  return {j.at(0).get<std::uint8_t>(), j.at(1).get<std::uint8_t>(), j.at(2).get<std::uint8_t>()};
}

}  // namespace

RigidTransform EgoTrajectory::pose_at(double time) const {
  const double yaw = yaw0 + yaw_rate * time;
  Vec3 p(x0, y0, 0.0);
  if (std::abs(yaw_rate) < 1e-12) {
    p += speed * time * Vec3(std::cos(yaw0), std::sin(yaw0), 0.0);
  } else {
    const double r = speed / yaw_rate;
    p += Vec3(r * (std::sin(yaw) - std::sin(yaw0)), r * (std::cos(yaw0) - std::cos(yaw)), 0.0);
  }
  return RigidTransform::from_axis_angle(Vec3::UnitZ(), yaw, p);
}

void SynthSpec::validate() const {
  if (frame_count < 1) throw Error(ErrorKind::InvalidArgument, "frame_count must be >= 1");
  if (!(frame_dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "frame_dt must be positive");
  if (rig.empty()) throw Error(ErrorKind::InvalidArgument, "rig needs at least one camera");
  for (const auto& c : rig) c.intrinsics.validate();
  for (const auto& o : objects) {
    if (!(o.half_extents.array() > 0.0).all()) {
      throw Error(ErrorKind::InvalidArgument, "object extents must be positive");
    }
  }
  if (!(checker_size > 0.0)) throw Error(ErrorKind::InvalidArgument, "checker_size must be positive");
}

std::vector<SynthObject> SynthSpec::all_objects() const {
  std::vector<SynthObject> out = objects;
  std::mt19937_64 rng(seed);
  for (int placed = 0; placed < random_boxes;) {
    SynthObject o;
    const double x = (2.0 * unit(rng) - 1.0) * random_extent;
    const double y = (2.0 * unit(rng) - 1.0) * random_extent;
    const Vec3 half(0.3 + 1.2 * unit(rng), 0.3 + 1.2 * unit(rng), 0.4 + 1.6 * unit(rng));
    o.color = {static_cast<std::uint8_t>(40 + 200 * unit(rng)),
               static_cast<std::uint8_t>(40 + 200 * unit(rng)),
               static_cast<std::uint8_t>(40 + 200 * unit(rng))};
    // Keep a 4 m corridor along world y = 0 free for the ego path.
    if (std::abs(y) < 4.0 + half.y()) continue;
    o.center = Point3(x, y, half.z());
    o.half_extents = half;
    out.push_back(o);
    ++placed;
  }
  return out;
}

std::vector<CameraMount> surround_rig(int width, int height, double hfov_deg, double pitch_deg) {
  const double fx = 0.5 * width / std::tan(0.5 * hfov_deg * kPi / 180.0);
  CameraIntrinsics k{fx, fx, 0.5 * width, 0.5 * height, width, height};
  const std::pair<const char*, double> mounts[] = {
      {"CAM_FRONT", 0.0},       {"CAM_FRONT_LEFT", 55.0},   {"CAM_FRONT_RIGHT", -55.0},
      {"CAM_BACK_LEFT", 110.0}, {"CAM_BACK_RIGHT", -110.0}, {"CAM_BACK", 180.0}};
  std::vector<CameraMount> rig;
  for (const auto& [name, yaw] : mounts) {
    const double a = yaw * kPi / 180.0;
    rig.push_back({name, k,
                   camera_mount(a, pitch_deg * kPi / 180.0,
                                Vec3(0.8 * std::cos(a), 0.5 * std::sin(a), 1.6))});
  }
  return rig;
}

RayHit cast_ray(const SynthSpec& spec, const std::vector<SynthObject>& objects, double time,
                const RigidTransform& camera_pose, const Vec3& ray_cam, bool include_dynamic) {
  const Point3 o = camera_pose.translation();
  const Vec3 d = camera_pose.rotation() * ray_cam;
  RayHit best;
  double best_t = std::numeric_limits<double>::infinity();

  if (spec.ground && d.z() < 0.0 && o.z() > 0.0) {
    const double t = -o.z() / d.z();
    const Point3 p = o + t * d;
    const auto cx = static_cast<std::int64_t>(std::floor(p.x() / spec.checker_size));
    const auto cy = static_cast<std::int64_t>(std::floor(p.y() / spec.checker_size));
    best_t = t;
    best.object = -1;
    best.color = ((cx + cy) % 2 == 0) ? spec.checker_a : spec.checker_b;
  }

  for (std::size_t i = 0; i < objects.size(); ++i) {
    const SynthObject& ob = objects[i];
    if (ob.dynamic && !include_dynamic) continue;
    const Point3 c = ob.center_at(time);
    const Vec3 lo = c - ob.half_extents, hi = c + ob.half_extents;
    double t_near = -std::numeric_limits<double>::infinity();
    double t_far = std::numeric_limits<double>::infinity();
    int face = -1;
    bool miss = false;
    for (int a = 0; a < 3 && !miss; ++a) {
      if (d[a] == 0.0) {
        miss = o[a] < lo[a] || o[a] > hi[a];
        continue;
      }
      double t0 = (lo[a] - o[a]) / d[a];
      double t1 = (hi[a] - o[a]) / d[a];
      int f = 2 * a;  // entering through the low face
      if (t0 > t1) {
        std::swap(t0, t1);
        f = 2 * a + 1;
      }
      if (t0 > t_near) {
        t_near = t0;
        face = f;
      }
      t_far = std::min(t_far, t1);
      miss = t_near > t_far;
    }
    if (miss || face < 0 || !(t_near > 1e-9) || !(t_near < best_t)) continue;
    best_t = t_near;
    best.object = static_cast<int>(i);
    best.color = shade(ob.color, face);
  }
  if (best.object != -2) best.depth = best_t;
  return best;
}

RaycastImage raycast(const SynthSpec& spec, double time, const RigidTransform& pose,
                     const CameraIntrinsics& k, bool include_dynamic) {
  const std::vector<SynthObject> objects = spec.all_objects();
  RaycastImage out;
  out.color = ColorImage(k.width, k.height);
  out.depth.assign(static_cast<std::size_t>(k.width) * k.height, 0.0);
  out.hit.assign(out.depth.size(), -2);
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const Vec3 ray((x + 0.5 - k.cx) / k.fx, (y + 0.5 - k.cy) / k.fy, 1.0);
      const RayHit h = cast_ray(spec, objects, time, pose, ray, include_dynamic);
      const std::size_t i = static_cast<std::size_t>(y) * k.width + x;
      out.hit[i] = h.object;
      out.depth[i] = h.depth;
      out.color.set(x, y, h.object == -2 ? spec.sky : h.color);
    }
  }
  return out;
}

RigidTransform camera_pose(const SynthSpec& spec, int frame, int camera) {
  return spec.ego.pose_at(spec.time_of(frame)) * spec.rig.at(camera).extrinsic;
}

Projection analytic_pixel(const SynthSpec& spec, int frame, int camera, const Point3& world_point) {
  const Point3 p_cam = camera_pose(spec, frame, camera).inverse().apply(world_point);
  return project(spec.rig.at(camera).intrinsics, p_cam);
}

json ground_truth_json(const SynthSpec& spec, const std::vector<RigidTransform>& perturbations) {
  const auto objects = spec.all_objects();
  json frames = json::array();
  for (int f = 0; f < spec.frame_count; ++f) {
    const double t = spec.time_of(f);
    json tracks = json::array();
    for (std::size_t i = 0; i < objects.size(); ++i) {
      if (!objects[i].dynamic) continue;
      const Point3 c = objects[i].center_at(t);
      tracks.push_back({{"object", i}, {"center", {c.x(), c.y(), c.z()}}});
    }
    json entry = {{"index", f}, {"timestamp", t}, {"ego_pose", to_json(spec.ego.pose_at(t))},
                  {"object_tracks", tracks}};
    if (!perturbations.empty()) entry["perturbation"] = to_json(perturbations.at(f));
    frames.push_back(entry);
  }
  return {{"scene_id", spec.scene_id}, {"seed", spec.seed}, {"frames", frames}};
}

SceneManifest generate(const SynthSpec& spec, const std::filesystem::path& out_dir) {
  spec.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "images", ec);
  std::filesystem::create_directories(out_dir / "depth", ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + out_dir.string() + ": " + ec.message());

  const std::vector<SynthObject> objects = spec.all_objects();
  SceneManifest m;
  m.scene_id = spec.scene_id;
  m.root = out_dir;
  for (const auto& c : spec.rig) m.rig.push_back(c.name);

  const std::size_t cams = spec.rig.size();
  for (int f = 0; f < spec.frame_count; ++f) {
    FrameRecord rec;
    rec.index = f;
    rec.timestamp = spec.time_of(f);
    rec.ego_pose = spec.ego.pose_at(rec.timestamp);
    for (std::size_t c = 0; c < cams; ++c) {
      char stem[64];
      std::snprintf(stem, sizeof stem, "%05d_%s.png", f, spec.rig[c].name.c_str());
      rec.cameras.push_back({spec.rig[c].name, spec.rig[c].intrinsics, spec.rig[c].extrinsic,
                             std::string("images/") + stem, std::string("depth/") + stem});
    }
    const RigidTransform world_to_ego = rec.ego_pose.inverse();
    const double ego_yaw = spec.ego.yaw0 + spec.ego.yaw_rate * rec.timestamp;
    for (const auto& o : objects) {
      if (!o.dynamic) continue;
      YawBox b;
      b.center = world_to_ego.apply(o.center_at(rec.timestamp));
      b.half_extents = o.half_extents + Vec3::Constant(spec.annotation_margin);
      b.yaw = -ego_yaw;
      rec.dynamic_boxes.push_back(b);
    }
    m.frames.push_back(std::move(rec));
  }

  const std::size_t jobs = static_cast<std::size_t>(spec.frame_count) * cams;
  parallel_for(jobs, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      const int f = static_cast<int>(j / cams);
      const int c = static_cast<int>(j % cams);
      const auto& k = spec.rig[c].intrinsics;
      const RaycastImage img = raycast(spec, spec.time_of(f), camera_pose(spec, f, c), k);
      DepthMap depth(k.width, k.height);
      for (std::size_t i = 0; i < img.depth.size(); ++i) {
        const double mm = std::round(img.depth[i] * 1000.0);
        if (img.hit[i] != -2 && mm >= 1.0 && mm <= 65535.0) depth.mm[i] = static_cast<std::uint16_t>(mm);
      }
      const CameraRecord& rec = m.frames[f].cameras[c];
      write_png(out_dir / rec.image_path, img.color);
      write_png(out_dir / rec.depth_path, depth);
    }
  });

  save_manifest(m, out_dir / "manifest.json");
  write_text_file(out_dir / "ground_truth.json", ground_truth_json(spec).dump(2) + "\n");
  return m;
}

PerturbedManifest perturb_poses(const SceneManifest& manifest, double rot_deg, double trans_m,
                                std::uint64_t seed) {
  if (rot_deg < 0.0 || trans_m < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "perturbation bounds must be non-negative");
  }
  PerturbedManifest out{manifest, {}};
  std::mt19937_64 rng(seed);
  for (std::size_t f = 0; f < manifest.frames.size(); ++f) {
    RigidTransform delta;
    if (f > 0 && (rot_deg > 0.0 || trans_m > 0.0)) {
      const Vec3 rotvec = uniform_in_ball(rng, rot_deg * kPi / 180.0);
      const Vec3 trans = uniform_in_ball(rng, trans_m);
      delta = RigidTransform::from_rotation_vector(rotvec, trans);
      out.manifest.frames[f].ego_pose = delta * manifest.frames[f].ego_pose;
    }
    out.perturbations.push_back(delta);
  }
  return out;
}

SynthSpec spec_from_json(const json& j) {
  SynthSpec s;
  try {
    s.scene_id = j.value("scene_id", s.scene_id);
    s.seed = j.value("seed", s.seed);
    s.frame_count = j.value("frame_count", s.frame_count);
    s.frame_dt = j.value("frame_dt", s.frame_dt);
    s.ground = j.value("ground", s.ground);
    s.checker_size = j.value("checker_size", s.checker_size);
    s.random_boxes = j.value("random_boxes", s.random_boxes);
    s.random_extent = j.value("random_extent", s.random_extent);
    s.annotation_margin = j.value("annotation_margin", s.annotation_margin);
    if (j.contains("checker_a")) s.checker_a = rgb(j.at("checker_a"));
    if (j.contains("checker_b")) s.checker_b = rgb(j.at("checker_b"));
    if (j.contains("sky")) s.sky = rgb(j.at("sky"));
    if (j.contains("ego")) {
      const json& e = j.at("ego");
      s.ego.x0 = e.value("x0", 0.0);
      s.ego.y0 = e.value("y0", 0.0);
      s.ego.yaw0 = e.value("yaw0", 0.0);
      s.ego.speed = e.value("speed", 0.0);
      s.ego.yaw_rate = e.value("yaw_rate", 0.0);
    }
    const json rig = j.value("rig", json("surround"));
    if (rig.is_string() || rig.is_object()) {
      const json opts = rig.is_object() ? rig : json::object();
      s.rig = surround_rig(opts.value("width", 160), opts.value("height", 120),
                           opts.value("hfov_deg", 70.0), opts.value("pitch_deg", 0.0));
    } else {
      for (const json& c : rig) {
        s.rig.push_back({c.at("name").get<std::string>(), intrinsics_from_json(c.at("intrinsics")),
                         transform_from_json(c.at("extrinsic"))});
      }
    }
    for (const json& o : j.value("objects", json::array())) {
      SynthObject ob;
      ob.center = vec3(o.at("center"));
      ob.half_extents = vec3(o.at("half_extents"));
      if (o.contains("color")) ob.color = rgb(o.at("color"));
      if (o.contains("velocity")) ob.velocity = vec3(o.at("velocity"));
      ob.dynamic = o.value("dynamic", false);
      s.objects.push_back(ob);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("synth spec: ") + e.what());
  }
  return s;
}

}  // namespace drive4d::synth
