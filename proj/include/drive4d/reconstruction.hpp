#pragma once

#include <span>
#include <vector>

#include "drive4d/geometry.hpp"
#include "drive4d/image.hpp"
#include "drive4d/point_cloud.hpp"
#include "drive4d/scene_io.hpp"

namespace drive4d {

// One ego-frame point per valid depth pixel on the stride grid (x % stride ==
// 0 and y % stride == 0), lifted through the pixel center (x+0.5, y+0.5),
// row-major order. The result carries frame_index = -1 until fused.
FramePointCloud lift_view(const DepthMap& depth, const ColorImage& image, const CameraIntrinsics& k,
                          const RigidTransform& cam_to_ego, int stride, std::uint8_t camera_index);

// Concatenates views in the given (rig) order and attaches the frame's index
// and timestamp. Views may be unindexed (-1) or must all carry frame.index;
// anything else raises MixedFrames.
FramePointCloud fuse_frame(std::span<const FramePointCloud> views, const FrameRecord& frame);

// Keeps at most one point per cubic voxel of edge `voxel`: the one nearest the
// voxel centroid, lowest original index on ties. Output keeps original order.
FramePointCloud voxel_downsample(const FramePointCloud& cloud, double voxel);

// Sets the dynamic flag on points inside any box. Returns the number flagged.
std::size_t mark_dynamic(FramePointCloud& cloud, std::span<const YawBox> boxes);

// Loads, lifts, fuses, and flags one manifest frame (ego frame).
FramePointCloud reconstruct_frame(const SceneManifest& manifest, std::size_t frame, int stride);

}  // namespace drive4d
