#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace drive4d {

// Conventions: right-handed. Camera frame is +z forward, +x right, +y down.
// Ego frame is +x forward, +y left, +z up. World is the ego frame of frame 0.

using Point3 = Eigen::Vector3d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// SE(3) element stored as a unit quaternion and a translation in meters.
// Maps p to R*p + T.
class RigidTransform {
 public:
  RigidTransform() = default;

  // Normalizes the quaternion; rejects inputs whose norm deviates from 1 by
  // more than 1e-6 (InvalidArgument).
  RigidTransform(double w, double x, double y, double z, const Vec3& translation);
  RigidTransform(const Eigen::Quaterniond& rotation, const Vec3& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Vec3& t);
  static RigidTransform from_axis_angle(const Vec3& axis, double angle_rad,
                                        const Vec3& translation = Vec3::Zero());
  // Rotation vector (axis * angle) form.
  static RigidTransform from_rotation_vector(const Vec3& rotvec,
                                             const Vec3& translation = Vec3::Zero());
  // `rotation` must be orthonormal with determinant +1.
  static RigidTransform from_matrix(const Mat3& rotation, const Vec3& translation);

  const Eigen::Quaterniond& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }
  Mat3 rotation_matrix() const { return rotation_.toRotationMatrix(); }
  Eigen::Matrix4d matrix() const;

  Point3 apply(const Point3& p) const { return rotation_ * p + translation_; }

  // (a * b).apply(p) == a.apply(b.apply(p))
  RigidTransform operator*(const RigidTransform& b) const;
  RigidTransform inverse() const;

  // Rotation angle in [0, pi] of this transform's rotation.
  double rotation_angle() const;

 private:
  Eigen::Quaterniond rotation_ = Eigen::Quaterniond::Identity();
  Vec3 translation_ = Vec3::Zero();
};

inline Point3 apply(const RigidTransform& t, const Point3& p) { return t.apply(p); }
inline RigidTransform compose(const RigidTransform& a, const RigidTransform& b) { return a * b; }
inline RigidTransform invert(const RigidTransform& t) { return t.inverse(); }

// Angle of a.rotation relative to b.rotation, radians.
double rotation_distance(const RigidTransform& a, const RigidTransform& b);
// Euclidean distance between translations, meters.
double translation_distance(const RigidTransform& a, const RigidTransform& b);

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  // Throws InvalidArgument unless fx, fy > 0, 0 <= cx < width, 0 <= cy < height.
  void validate() const;
};

struct Projection {
  double u = 0.0;      // pixels, rightward from the top-left corner
  double v = 0.0;      // pixels, downward
  double depth = 0.0;  // meters along +z
};

// Pinhole projection of a camera-frame point. Throws BehindCamera for z <= 0.
Projection project(const CameraIntrinsics& k, const Point3& p_cam);

// Back-projects continuous pixel coordinates at the given depth. Throws
// NonPositiveDepth for depth <= 0.
Point3 lift(const CameraIntrinsics& k, double u, double v, double depth);

// Box rotated by `yaw` about +z, tested inclusively against its faces.
struct YawBox {
  Point3 center = Point3::Zero();
  Vec3 half_extents = Vec3::Ones();
  double yaw = 0.0;

  bool contains(const Point3& p) const;
};

// Camera-to-ego transform for a camera mounted at `position` (ego frame),
// looking along ego +x rotated by `yaw` about +z, then pitched down by `pitch`.
RigidTransform camera_mount(double yaw_rad, double pitch_rad, const Vec3& position);

}  // namespace drive4d
