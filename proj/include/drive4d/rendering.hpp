#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "drive4d/alignment.hpp"
#include "drive4d/geometry.hpp"
#include "drive4d/image.hpp"
#include "drive4d/scene_io.hpp"

namespace drive4d {

inline constexpr double kNearPlane = 0.05;  // meters
inline constexpr int kMaxSplatRadius = 3;

struct RenderControl {
  RigidTransform camera_pose;     // camera-to-world
  std::vector<int> time_selector; // frame indices whose clouds are projected
  CameraIntrinsics intrinsics;
  int splat_radius = 0;           // square half-width in pixels
};

struct PointRef {
  std::int32_t frame = -1;
  std::int32_t index = -1;
  bool valid() const { return frame >= 0; }
  bool operator==(const PointRef&) const = default;
};

struct KeyframeRender {
  ColorImage color;
  std::vector<float> depth;  // meters, 0 where unoccupied
  GrayImage occupancy;       // 255 where a point landed, else 0
  std::vector<PointRef> source;  // winning point per pixel

  int width() const { return color.width; }
  int height() const { return color.height; }
  bool occupied(int x, int y) const { return occupancy.at(x, y) != 0; }
  float depth_at(int x, int y) const { return depth[static_cast<std::size_t>(y) * width() + x]; }
  std::size_t occupied_count() const;
  // Millimeter export; occupied depths clamp to [1, 65535].
  DepthMap depth_mm() const;
  bool operator==(const KeyframeRender&) const = default;
};

// Z-buffered point projection. Points flagged removed are skipped; points with
// camera depth <= kNearPlane are discarded; each point covers its pixel
// (floor(u), floor(v)) and the square splat neighborhood. The nearest depth
// wins; at equal depth the lowest (frame, index) wins. EmptySelection for an
// empty time selector.
KeyframeRender render_keyframe(const Scene4D& scene, const RenderControl& control);

// Fixed time, varying camera.
std::vector<KeyframeRender> render_frozen_time(const Scene4D& scene, int frame,
                                               std::span<const RigidTransform> camera_poses,
                                               const CameraIntrinsics& intrinsics,
                                               int splat_radius = 0);

// Fixed camera, varying time.
std::vector<KeyframeRender> render_frozen_space(const Scene4D& scene,
                                                const RigidTransform& camera_pose,
                                                std::span<const int> frames,
                                                const CameraIntrinsics& intrinsics,
                                                int splat_radius = 0);

struct RemovalBox {
  YawBox box;  // world frame
  int first_frame = 0;
  int last_frame = 0;  // inclusive

  void validate() const;
};

// Soft delete: sets the removed flag on points inside any box whose frame range
// covers the point's frame. `flagged`, when given, receives the count of
// points newly flagged.
Scene4D remove_objects(const Scene4D& scene, std::span<const RemovalBox> boxes,
                       std::size_t* flagged = nullptr);

struct TrainingPair {
  KeyframeRender condition;  // condition_frame's cloud seen from target_frame's camera
  ColorImage target;         // target_frame's recorded image
  int condition_frame = 0;   // 0-based storage index; even in 1-based labels
  int target_frame = 0;      // 0-based storage index; odd in 1-based labels
  int camera = 0;
};

// For 0-based frames (2n, 2n+1): projects frame 2n+1 with frame 2n's refined
// camera pose and intrinsics, per camera. Ordered by (n, camera).
// TooFewFrames below two frames.
std::vector<TrainingPair> export_training_pairs(const Scene4D& scene, const SceneManifest& manifest,
                                                int splat_radius = 0);

// Camera-to-world pose of a manifest camera under the scene's refined ego pose.
RigidTransform refined_camera_pose(const Scene4D& scene, const SceneManifest& manifest, int frame,
                                   int camera);

// Writes {stem}_color.png, {stem}_depth.png, {stem}_occ.png.
void write_render(const KeyframeRender& render, const std::filesystem::path& dir,
                  const std::string& stem);

// cond/{stem}_{color,depth,occ}.png, gt/{stem}.png and pairs.json.
void write_training_pairs(std::span<const TrainingPair> pairs, const SceneManifest& manifest,
                          const std::filesystem::path& out_dir);

std::string pair_stem(const TrainingPair& pair, const SceneManifest& manifest);

}  // namespace drive4d
