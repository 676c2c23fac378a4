#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "drive4d/geometry.hpp"
#include "drive4d/image.hpp"

namespace drive4d {

enum PointFlags : std::uint8_t {
  kFlagDynamic = 1u << 0,
  kFlagRemoved = 1u << 1,
};

// One colored sample. Positions are single precision to match the on-disk
// container exactly.
struct CloudPoint {
  std::array<float, 3> position{};
  Rgb color{};
  std::uint8_t camera = 0;
  std::uint8_t flags = 0;

  Point3 point() const { return {position[0], position[1], position[2]}; }
  bool dynamic() const { return (flags & kFlagDynamic) != 0; }
  bool removed() const { return (flags & kFlagRemoved) != 0; }
  bool operator==(const CloudPoint&) const = default;
};

enum class FrameTag { Ego, World };

struct FramePointCloud {
  int frame_index = 0;
  double timestamp = 0.0;
  FrameTag tag = FrameTag::Ego;
  std::vector<CloudPoint> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool operator==(const FramePointCloud&) const = default;
};

inline std::array<float, 3> to_float3(const Point3& p) {
  return {static_cast<float>(p.x()), static_cast<float>(p.y()), static_cast<float>(p.z())};
}

}  // namespace drive4d
