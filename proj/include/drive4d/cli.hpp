#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "drive4d/alignment.hpp"
#include "drive4d/error.hpp"
#include "drive4d/rendering.hpp"
#include "drive4d/scene_io.hpp"

namespace drive4d::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitProcessing = 3;

int exit_code_for(ErrorKind kind);

struct JobConfig {
  std::filesystem::path manifest;
  std::filesystem::path output_dir;
  AlignmentConfig alignment;
  int stride = 1;
  double voxel = 0.1;  // reference voxel for alignment
  std::optional<std::filesystem::path> removal_boxes;
  bool export_ply = false;

  void validate() const;
};

JobConfig job_config_from_json(const nlohmann::json& j);
AlignmentConfig alignment_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AlignmentConfig& cfg);
nlohmann::json to_json(const AlignmentReport& report);

enum class TrajectoryMode { FrozenTime, FrozenSpace, Free };

struct TrajectoryStep {
  std::optional<int> time;
  std::optional<RigidTransform> pose_delta;  // right-multiplied onto the base camera pose
};

struct TrajectorySpec {
  TrajectoryMode mode = TrajectoryMode::FrozenTime;
  int base_frame = 0;
  std::string camera;
  std::optional<CameraIntrinsics> intrinsics;
  int splat_radius = 0;
  std::vector<TrajectoryStep> steps;
};

// InvalidTrajectory on schema or mode/field mismatches.
TrajectorySpec trajectory_from_json(const nlohmann::json& j);

// On-disk result of `build`: scene.json, cloud.stg4, alignment_report.json.
struct SceneArtifact {
  std::string scene_id;
  std::filesystem::path manifest_path;
  std::vector<std::string> rig;
  std::vector<std::vector<CameraRecord>> cameras;  // per frame, rig order
  Scene4D scene;

  RigidTransform camera_pose(int frame, int camera) const;  // refined, camera-to-world
  int camera_index(const std::string& name) const;           // InvalidArgument
};

void save_artifact(const SceneArtifact& artifact, const std::filesystem::path& dir);
SceneArtifact load_artifact(const std::filesystem::path& dir);

std::vector<RemovalBox> removal_boxes_from_json(const nlohmann::json& j);

// Each command returns a machine-readable summary and throws drive4d::Error.
struct BuildResult {
  nlohmann::json summary;
  bool alignment_failed = false;  // some frame fell back to coarse alignment
};
BuildResult cmd_build(const JobConfig& config);
nlohmann::json cmd_render(const std::filesystem::path& scene_dir,
                          const std::filesystem::path& trajectory_path,
                          const std::filesystem::path& out_dir);
nlohmann::json cmd_export_pairs(const std::filesystem::path& scene_dir,
                                const std::filesystem::path& out_dir, int splat_radius = 0);
nlohmann::json cmd_remove(const std::filesystem::path& scene_dir,
                          const std::filesystem::path& boxes_path,
                          const std::filesystem::path& out_dir);
nlohmann::json cmd_eval(const std::filesystem::path& render_dir, const std::filesystem::path& gt_dir,
                        const std::filesystem::path& out_dir, bool masked);
nlohmann::json cmd_synth(const std::filesystem::path& config_path,
                         const std::filesystem::path& out_dir);

// Full command-line entry point; returns the process exit code.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args);

}  // namespace drive4d::cli
