#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "drive4d/geometry.hpp"

namespace drive4d {

// Static 3-d tree over a fixed point set for single nearest-neighbor queries.
// Ties at equal distance resolve to the lowest input index.
class KdTree3 {
 public:
  struct Neighbor {
    std::uint32_t index;
    double squared_distance;
  };

  KdTree3() = default;
  explicit KdTree3(std::vector<Point3> points);

  std::size_t size() const { return points_.size(); }
  const Point3& point(std::size_t i) const { return points_[i]; }

  // Nearest point with squared distance <= max_squared_distance, if any.
  std::optional<Neighbor> nearest(
      const Point3& query,
      double max_squared_distance = std::numeric_limits<double>::infinity()) const;

 private:
  static constexpr std::uint32_t kLeafSize = 8;

  struct Node {
    std::uint32_t begin;  // range into order_
    std::uint32_t end;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = -1;        // -1 for leaves
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node, const Point3& q, Neighbor& best) const;

  std::vector<Point3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace drive4d
