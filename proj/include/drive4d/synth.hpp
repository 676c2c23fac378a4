#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "drive4d/geometry.hpp"
#include "drive4d/image.hpp"
#include "drive4d/scene_io.hpp"

namespace drive4d::synth {

struct CameraMount {
  std::string name;
  CameraIntrinsics intrinsics;
  RigidTransform extrinsic;  // camera-to-ego
};

// Planar ego motion at constant speed along the heading and constant yaw rate.
struct EgoTrajectory {
  double x0 = 0.0, y0 = 0.0, yaw0 = 0.0;
  double speed = 0.0;     // m/s
  double yaw_rate = 0.0;  // rad/s

  RigidTransform pose_at(double time) const;  // ego-to-world
};

// Axis-aligned box; dynamic boxes translate with `velocity`.
struct SynthObject {
  Point3 center = Point3::Zero();  // world, at time 0
  Vec3 half_extents = Vec3::Constant(0.5);
  Rgb color{200, 60, 60};
  Vec3 velocity = Vec3::Zero();  // m/s
  bool dynamic = false;

  Point3 center_at(double time) const { return dynamic ? Point3(center + velocity * time) : center; }
};

struct SynthSpec {
  std::string scene_id = "synthetic";
  std::uint64_t seed = 0;
  int frame_count = 1;
  double frame_dt = 1.0;
  std::vector<CameraMount> rig;
  EgoTrajectory ego;
  std::vector<SynthObject> objects;
  bool ground = true;
  double checker_size = 1.0;
  Rgb checker_a{90, 90, 90};
  Rgb checker_b{170, 170, 170};
  Rgb sky{0, 0, 0};
  // Static boxes scattered from `seed` over [-extent, extent]^2.
  int random_boxes = 0;
  double random_extent = 20.0;
  // Margin added to emitted dynamic-box annotations (meters).
  double annotation_margin = 0.02;

  void validate() const;  // InvalidArgument
  double time_of(int frame) const { return frame * frame_dt; }
  // Objects including the seeded random boxes, in a fixed order.
  std::vector<SynthObject> all_objects() const;
};

// Six cameras at 1.6 m height: FRONT, FRONT_LEFT, FRONT_RIGHT, BACK_LEFT,
// BACK_RIGHT, BACK with the given horizontal field of view.
std::vector<CameraMount> surround_rig(int width, int height, double hfov_deg, double pitch_deg = 0.0);

// Per-pixel result of an analytic ray cast through pixel centers.
struct RaycastImage {
  ColorImage color;
  std::vector<double> depth;  // camera-frame depth in meters, 0 on a miss
  std::vector<int> hit;       // object index, -1 ground, -2 miss

  double depth_at(int x, int y) const { return depth[static_cast<std::size_t>(y) * color.width + x]; }
  int hit_at(int x, int y) const { return hit[static_cast<std::size_t>(y) * color.width + x]; }
};

struct RayHit {
  double depth = 0.0;  // camera depth (ray parameter for a z = 1 camera ray)
  int object = -2;
  Rgb color{};
};

// Casts one camera-frame ray (x, y, 1) from `camera_pose` at `time`.
RayHit cast_ray(const SynthSpec& spec, const std::vector<SynthObject>& objects, double time,
                const RigidTransform& camera_pose, const Vec3& ray_cam, bool include_dynamic = true);

RaycastImage raycast(const SynthSpec& spec, double time, const RigidTransform& camera_pose,
                     const CameraIntrinsics& k, bool include_dynamic = true);

// Camera-to-world pose of rig camera `camera` at `frame`, from exact poses.
RigidTransform camera_pose(const SynthSpec& spec, int frame, int camera);

// Writes images/, depth/, manifest.json and ground_truth.json under out_dir.
// IoError on write failures.
SceneManifest generate(const SynthSpec& spec, const std::filesystem::path& out_dir);

struct PerturbedManifest {
  SceneManifest manifest;
  std::vector<RigidTransform> perturbations;  // perturbed = perturbation * exact
};

// Left-composes every ego pose after frame 0 with a seeded random rigid
// motion: rotation vector and translation uniform in balls of radius
// rot_deg and trans_m. Frame 0 anchors the world and stays exact.
PerturbedManifest perturb_poses(const SceneManifest& manifest, double rot_deg, double trans_m,
                                std::uint64_t seed);

// Exact projection of a world point into rig camera `camera` at `frame`.
// BehindCamera when the point is not in front of the camera.
Projection analytic_pixel(const SynthSpec& spec, int frame, int camera, const Point3& world_point);

nlohmann::json ground_truth_json(const SynthSpec& spec,
                                 const std::vector<RigidTransform>& perturbations = {});
SynthSpec spec_from_json(const nlohmann::json& j);  // ParseError

}  // namespace drive4d::synth
