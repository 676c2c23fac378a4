#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "drive4d/geometry.hpp"
#include "drive4d/image.hpp"
#include "drive4d/point_cloud.hpp"

namespace drive4d {

struct CameraRecord {
  std::string name;
  CameraIntrinsics intrinsics;
  RigidTransform extrinsic;  // camera-to-ego
  std::string image_path;    // relative to the manifest directory
  std::string depth_path;
};

struct FrameRecord {
  int index = 0;
  double timestamp = 0.0;
  RigidTransform ego_pose;  // ego-to-world
  std::vector<CameraRecord> cameras;
  // Optional annotations in this frame's ego coordinates; points inside are
  // flagged dynamic at lift time.
  std::vector<YawBox> dynamic_boxes;
};

struct SceneManifest {
  std::string scene_id;
  std::vector<std::string> rig;
  std::vector<FrameRecord> frames;
  std::filesystem::path root;         // directory the relative paths resolve against
  std::vector<std::string> warnings;  // unknown fields seen while parsing

  std::filesystem::path resolve(const std::string& relative) const { return root / relative; }
  std::size_t camera_index(const std::string& name) const;  // throws InvalidArgument
};

// Parses and validates every invariant eagerly, including that each referenced
// asset exists and matches its intrinsics. Throws ParseError or
// ValidationError.
SceneManifest load_manifest(const std::filesystem::path& path);

// Validation without touching the referenced files.
void validate_manifest_structure(const SceneManifest& manifest);
void validate_manifest_assets(const SceneManifest& manifest);

nlohmann::json manifest_to_json(const SceneManifest& manifest);
SceneManifest manifest_from_json(const nlohmann::json& j, std::vector<std::string>* warnings);
void save_manifest(const SceneManifest& manifest, const std::filesystem::path& path);

nlohmann::json to_json(const RigidTransform& t);
RigidTransform transform_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CameraIntrinsics& k);
CameraIntrinsics intrinsics_from_json(const nlohmann::json& j);
nlohmann::json to_json(const YawBox& b);
YawBox yaw_box_from_json(const nlohmann::json& j);

// 16-bit single-channel PNG in millimeters. FormatError on other layouts,
// DimensionMismatch when the size disagrees with the intrinsics.
DepthMap load_depth(const std::filesystem::path& path, const CameraIntrinsics& k);
ColorImage load_image(const std::filesystem::path& path, const CameraIntrinsics& k);

// Binary container: "STG4", u32 version, u64 count, then 24-byte little-endian
// records:
//   0  f32 x, f32 y, f32 z   (meters)
//   12 u8 r, g, b
//   15 u8 reserved (0)
//   16 u16 frame index
//   18 u8 camera index
//   19 u8 flags (bit0 dynamic, bit1 removed)
//   20 u32 reserved (0)
inline constexpr std::uint32_t kCloudVersion = 1;
inline constexpr std::size_t kCloudHeaderBytes = 16;
inline constexpr std::size_t kCloudRecordBytes = 24;

struct CloudRecord {
  CloudPoint point;
  std::uint16_t frame = 0;
  bool operator==(const CloudRecord&) const = default;
};

std::vector<std::uint8_t> encode_cloud(std::span<const CloudRecord> records);
std::vector<CloudRecord> decode_cloud(std::span<const std::uint8_t> bytes);

// Frames are written in the given order. Loading regroups records by frame
// index into frames 0..max (gaps become empty frames) tagged World with zero
// timestamps; callers restore timestamps from their own metadata.
void save_cloud(std::span<const FramePointCloud> frames, const std::filesystem::path& path);
std::vector<FramePointCloud> load_cloud(const std::filesystem::path& path);

std::vector<CloudRecord> flatten(std::span<const FramePointCloud> frames);

// ASCII PLY with positions and colors.
void export_ply(std::span<const FramePointCloud> frames, const std::filesystem::path& path,
                bool skip_removed = true);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_file(const std::filesystem::path& path, const std::string& text);
nlohmann::json read_json_file(const std::filesystem::path& path);  // ParseError / IoError

}  // namespace drive4d
