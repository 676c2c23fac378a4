#include "drive4d/reconstruction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "drive4d/error.hpp"

namespace drive4d {

FramePointCloud lift_view(const DepthMap& depth, const ColorImage& image, const CameraIntrinsics& k,
                          const RigidTransform& cam_to_ego, int stride, std::uint8_t camera_index) {
  if (stride < 1) throw Error(ErrorKind::InvalidArgument, "stride must be >= 1");
  if (depth.width != k.width || depth.height != k.height || image.width != k.width ||
      image.height != k.height) {
    throw Error(ErrorKind::DimensionMismatch, "depth/image size disagrees with intrinsics");
  }
  FramePointCloud out;
  out.frame_index = -1;
  out.tag = FrameTag::Ego;
  for (int y = 0; y < depth.height; y += stride) {
    for (int x = 0; x < depth.width; x += stride) {
      if (!depth.valid(x, y)) continue;
      const Point3 cam = lift(k, x + 0.5, y + 0.5, depth.meters(x, y));
      CloudPoint p;
      p.position = to_float3(cam_to_ego.apply(cam));
      p.color = image.at(x, y);
      p.camera = camera_index;
      out.points.push_back(p);
    }
  }
  return out;
}

FramePointCloud fuse_frame(std::span<const FramePointCloud> views, const FrameRecord& frame) {
  FramePointCloud out;
  out.frame_index = frame.index;
  out.timestamp = frame.timestamp;
  out.tag = FrameTag::Ego;
  std::size_t total = 0;
  for (const auto& v : views) {
    if (v.frame_index != -1 && v.frame_index != frame.index) {
      throw Error(ErrorKind::MixedFrames, "view from frame " + std::to_string(v.frame_index) +
                                              " fused into frame " + std::to_string(frame.index));
    }
    if (v.tag != FrameTag::Ego) throw Error(ErrorKind::WrongFrameTag, "views must be ego-frame");
    total += v.size();
  }
  out.points.reserve(total);
  for (const auto& v : views) out.points.insert(out.points.end(), v.points.begin(), v.points.end());
  return out;
}

FramePointCloud voxel_downsample(const FramePointCloud& cloud, double voxel) {
  if (!(voxel > 0.0)) throw Error(ErrorKind::InvalidArgument, "voxel size must be positive");
  const std::size_t n = cloud.size();
  using Key = std::array<std::int64_t, 3>;
  std::vector<Key> keys(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = cloud.points[i].position;
    for (int a = 0; a < 3; ++a) keys[i][a] = static_cast<std::int64_t>(std::floor(p[a] / voxel));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return keys[a] != keys[b] ? keys[a] < keys[b] : a < b;
  });

  std::vector<std::size_t> keep;
  for (std::size_t g = 0; g < n;) {
    std::size_t e = g;
    Point3 sum = Point3::Zero();
    while (e < n && keys[order[e]] == keys[order[g]]) sum += cloud.points[order[e++]].point();
    const Point3 centroid = sum / static_cast<double>(e - g);
    std::size_t best = order[g];
    double best_d = (cloud.points[best].point() - centroid).squaredNorm();
    for (std::size_t j = g + 1; j < e; ++j) {
      const double d = (cloud.points[order[j]].point() - centroid).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = order[j];
      }
    }
    keep.push_back(best);
    g = e;
  }
  std::sort(keep.begin(), keep.end());

  FramePointCloud out;
  out.frame_index = cloud.frame_index;
  out.timestamp = cloud.timestamp;
  out.tag = cloud.tag;
  out.points.reserve(keep.size());
  for (std::size_t i : keep) out.points.push_back(cloud.points[i]);
  return out;
}

std::size_t mark_dynamic(FramePointCloud& cloud, std::span<const YawBox> boxes) {
  std::size_t flagged = 0;
  if (boxes.empty()) return 0;
  for (auto& p : cloud.points) {
    const Point3 q = p.point();
    if (std::any_of(boxes.begin(), boxes.end(), [&](const YawBox& b) { return b.contains(q); })) {
      p.flags |= kFlagDynamic;
      ++flagged;
    }
  }
  return flagged;
}

FramePointCloud reconstruct_frame(const SceneManifest& manifest, std::size_t frame, int stride) {
  const FrameRecord& f = manifest.frames.at(frame);
  std::vector<FramePointCloud> views;
  views.reserve(f.cameras.size());
  for (std::size_t c = 0; c < f.cameras.size(); ++c) {
    const CameraRecord& cam = f.cameras[c];
    const DepthMap depth = load_depth(manifest.resolve(cam.depth_path), cam.intrinsics);
    const ColorImage image = load_image(manifest.resolve(cam.image_path), cam.intrinsics);
    views.push_back(lift_view(depth, image, cam.intrinsics, cam.extrinsic, stride,
                              static_cast<std::uint8_t>(c)));
  }
  FramePointCloud cloud = fuse_frame(views, f);
  mark_dynamic(cloud, f.dynamic_boxes);
  return cloud;
}

}  // namespace drive4d
