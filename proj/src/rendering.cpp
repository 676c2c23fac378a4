#include "drive4d/rendering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "drive4d/error.hpp"
#include "drive4d/parallel.hpp"

namespace drive4d {

std::size_t KeyframeRender::occupied_count() const {
  return static_cast<std::size_t>(
      std::count_if(occupancy.data.begin(), occupancy.data.end(), [](std::uint8_t v) { return v != 0; }));
}

DepthMap KeyframeRender::depth_mm() const {
  DepthMap out(width(), height());
  for (std::size_t i = 0; i < depth.size(); ++i) {
    if (occupancy.data[i] == 0) continue;
    const double mm = std::round(static_cast<double>(depth[i]) * 1000.0);
    out.mm[i] = static_cast<std::uint16_t>(std::clamp(mm, 1.0, 65535.0));
  }
  return out;
}

namespace {

struct Projected {
  std::int32_t px = 0;
  std::int32_t py = 0;
  float depth = 0.0f;
  bool keep = false;
};

}  // namespace

KeyframeRender render_keyframe(const Scene4D& scene, const RenderControl& control) {
  const CameraIntrinsics& k = control.intrinsics;
  k.validate();
  if (control.splat_radius < 0 || control.splat_radius > kMaxSplatRadius) {
    throw Error(ErrorKind::InvalidArgument, "splat radius must be in [0, 3]");
  }
  if (control.time_selector.empty()) {
    throw Error(ErrorKind::EmptySelection, "time selector selects no frames");
  }
  if (scene.frames.empty()) throw Error(ErrorKind::InvalidArgument, "scene is empty");
  std::vector<int> frames = control.time_selector;
  std::sort(frames.begin(), frames.end());
  frames.erase(std::unique(frames.begin(), frames.end()), frames.end());
  for (int f : frames) {
    if (f < 0 || f >= static_cast<int>(scene.frames.size())) {
      throw Error(ErrorKind::InvalidArgument, "time selector index " + std::to_string(f) +
                                                  " outside scene of " +
                                                  std::to_string(scene.frames.size()) + " frames");
    }
  }

  const int w = k.width, h = k.height;
  KeyframeRender out;
  out.color = ColorImage(w, h);
  out.depth.assign(static_cast<std::size_t>(w) * h, 0.0f);
  out.occupancy = GrayImage(w, h);
  out.source.assign(static_cast<std::size_t>(w) * h, PointRef{});

  const RigidTransform world_to_cam = control.camera_pose.inverse();
  const Mat3 r = world_to_cam.rotation_matrix();
  const Vec3 t = world_to_cam.translation();
  const int rad = control.splat_radius;
  std::vector<Projected> proj;

  for (int f : frames) {
    const auto& pts = scene.frames[f].points;
    proj.assign(pts.size(), Projected{});
    parallel_for(pts.size(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        if (pts[i].removed()) continue;
        const Point3 c = r * pts[i].point() + t;
        if (!(c.z() > kNearPlane)) continue;
        const double u = k.fx * c.x() / c.z() + k.cx;
        const double v = k.fy * c.y() / c.z() + k.cy;
        const double fu = std::floor(u), fv = std::floor(v);
        if (fu < -rad || fv < -rad || fu >= w + rad || fv >= h + rad) continue;
        proj[i] = {static_cast<std::int32_t>(fu), static_cast<std::int32_t>(fv),
                   static_cast<float>(c.z()), true};
      }
    });
    // Sequential z-test in (frame, index) order; strict < keeps the earliest on ties.
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Projected& p = proj[i];
      if (!p.keep) continue;
      for (int dy = -rad; dy <= rad; ++dy) {
        const int y = p.py + dy;
        if (y < 0 || y >= h) continue;
        for (int dx = -rad; dx <= rad; ++dx) {
          const int x = p.px + dx;
          if (x < 0 || x >= w) continue;
          const std::size_t pix = static_cast<std::size_t>(y) * w + x;
          if (out.occupancy.data[pix] != 0 && !(p.depth < out.depth[pix])) continue;
          out.occupancy.data[pix] = 255;
          out.depth[pix] = p.depth;
          out.color.set(x, y, pts[i].color);
          out.source[pix] = {f, static_cast<std::int32_t>(i)};
        }
      }
    }
  }
  return out;
}

std::vector<KeyframeRender> render_frozen_time(const Scene4D& scene, int frame,
                                               std::span<const RigidTransform> camera_poses,
                                               const CameraIntrinsics& intrinsics,
                                               int splat_radius) {
  std::vector<KeyframeRender> out;
  out.reserve(camera_poses.size());
  for (const auto& pose : camera_poses) {
    out.push_back(render_keyframe(scene, {pose, {frame}, intrinsics, splat_radius}));
  }
  return out;
}

std::vector<KeyframeRender> render_frozen_space(const Scene4D& scene,
                                                const RigidTransform& camera_pose,
                                                std::span<const int> frames,
                                                const CameraIntrinsics& intrinsics,
                                                int splat_radius) {
  std::vector<KeyframeRender> out;
  out.reserve(frames.size());
  for (int f : frames) {
    out.push_back(render_keyframe(scene, {camera_pose, {f}, intrinsics, splat_radius}));
  }
  return out;
}

void RemovalBox::validate() const {
  if (!(box.half_extents.array() > 0.0).all()) {
    throw Error(ErrorKind::InvalidArgument, "removal box extents must be positive");
  }
  if (last_frame < first_frame) throw Error(ErrorKind::InvalidArgument, "empty removal frame range");
}

Scene4D remove_objects(const Scene4D& scene, std::span<const RemovalBox> boxes,
                       std::size_t* flagged) {
  for (const auto& b : boxes) b.validate();
  Scene4D out = scene;
  std::size_t count = 0;
  for (auto& frame : out.frames) {
    for (const auto& b : boxes) {
      if (frame.frame_index < b.first_frame || frame.frame_index > b.last_frame) continue;
      for (auto& p : frame.points) {
        if (!p.removed() && b.box.contains(p.point())) {
          p.flags |= kFlagRemoved;
          ++count;
        }
      }
    }
  }
  if (flagged) *flagged = count;
  return out;
}

RigidTransform refined_camera_pose(const Scene4D& scene, const SceneManifest& manifest, int frame,
                                   int camera) {
  return scene.refined_poses.at(frame) * manifest.frames.at(frame).cameras.at(camera).extrinsic;
}

std::vector<TrainingPair> export_training_pairs(const Scene4D& scene, const SceneManifest& manifest,
                                                int splat_radius) {
  if (scene.size() < 2) {
    throw Error(ErrorKind::TooFewFrames, "pair export needs >= 2 frames, scene has " +
                                             std::to_string(scene.size()));
  }
  if (manifest.frames.size() < scene.size()) {
    throw Error(ErrorKind::InvalidArgument, "manifest has fewer frames than the scene");
  }
  std::vector<TrainingPair> pairs;
  for (std::size_t gt = 0; gt + 1 < scene.size(); gt += 2) {
    const FrameRecord& rec = manifest.frames[gt];
    for (std::size_t c = 0; c < rec.cameras.size(); ++c) {
      const CameraRecord& cam = rec.cameras[c];
      TrainingPair pair;
      pair.target_frame = static_cast<int>(gt);
      pair.condition_frame = static_cast<int>(gt + 1);
      pair.camera = static_cast<int>(c);
      RenderControl control{refined_camera_pose(scene, manifest, pair.target_frame, pair.camera),
                            {pair.condition_frame},
                            cam.intrinsics,
                            splat_radius};
      pair.condition = render_keyframe(scene, control);
      pair.target = load_image(manifest.resolve(cam.image_path), cam.intrinsics);
      pairs.push_back(std::move(pair));
    }
  }
  return pairs;
}

void write_render(const KeyframeRender& render, const std::filesystem::path& dir,
                  const std::string& stem) {
  write_png(dir / (stem + "_color.png"), render.color);
  write_png(dir / (stem + "_depth.png"), render.depth_mm());
  write_png(dir / (stem + "_occ.png"), render.occupancy);
}

std::string pair_stem(const TrainingPair& pair, const SceneManifest& manifest) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%05d_", pair.target_frame / 2);
  return buf + manifest.rig.at(pair.camera);
}

void write_training_pairs(std::span<const TrainingPair> pairs, const SceneManifest& manifest,
                          const std::filesystem::path& out_dir) {
  const auto cond = out_dir / "cond";
  const auto gt = out_dir / "gt";
  std::filesystem::create_directories(cond);
  std::filesystem::create_directories(gt);
  nlohmann::json index = nlohmann::json::array();
  for (const auto& p : pairs) {
    const std::string stem = pair_stem(p, manifest);
    write_render(p.condition, cond, stem);
    write_png(gt / (stem + ".png"), p.target);
    index.push_back({{"stem", stem},
                     {"condition_frame", p.condition_frame},
                     {"target_frame", p.target_frame},
                     {"condition_label", p.condition_frame + 1},
                     {"target_label", p.target_frame + 1},
                     {"camera", manifest.rig.at(p.camera)},
                     {"occupied_pixels", p.condition.occupied_count()}});
  }
  nlohmann::json doc = {{"scene_id", manifest.scene_id},
                        {"frame_numbering", "labels are 1-based (odd target, even condition); "
                                            "*_frame fields are 0-based storage indices"},
                        {"pairs", index}};
  write_text_file(out_dir / "pairs.json", doc.dump(2) + "\n");
}

}  // namespace drive4d
