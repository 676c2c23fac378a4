#include "drive4d/geometry.hpp"

#include <cmath>
#include <sstream>

#include "drive4d/error.hpp"

namespace drive4d {

namespace {

constexpr double kNormTolerance = 1e-6;

Eigen::Quaterniond checked_unit(const Eigen::Quaterniond& q) {
  const double n = q.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > kNormTolerance) {
    std::ostringstream os;
    os << "quaternion norm " << n << " deviates from 1 by more than " << kNormTolerance;
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
  return q.normalized();
}

}  // namespace

RigidTransform::RigidTransform(double w, double x, double y, double z, const Vec3& translation)
    : RigidTransform(Eigen::Quaterniond(w, x, y, z), translation) {}

RigidTransform::RigidTransform(const Eigen::Quaterniond& rotation, const Vec3& translation)
    : rotation_(checked_unit(rotation)), translation_(translation) {
  if (!translation_.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "translation is not finite");
  }
  // Canonical hemisphere keeps serialized poses stable.
  if (rotation_.w() < 0.0) rotation_.coeffs() = -rotation_.coeffs();
}

RigidTransform RigidTransform::from_translation(const Vec3& t) {
  return {Eigen::Quaterniond::Identity(), t};
}

RigidTransform RigidTransform::from_axis_angle(const Vec3& axis, double angle_rad,
                                               const Vec3& translation) {
  const double n = axis.norm();
  if (!(n > 0.0)) throw Error(ErrorKind::InvalidArgument, "rotation axis has zero length");
  return {Eigen::Quaterniond(Eigen::AngleAxisd(angle_rad, axis / n)), translation};
}

RigidTransform RigidTransform::from_rotation_vector(const Vec3& rotvec, const Vec3& translation) {
  const double angle = rotvec.norm();
  if (angle == 0.0) return from_translation(translation);
  return from_axis_angle(rotvec / angle, angle, translation);
}

RigidTransform RigidTransform::from_matrix(const Mat3& rotation, const Vec3& translation) {
  if (!((rotation * rotation.transpose() - Mat3::Identity()).norm() < 1e-6) ||
      !(rotation.determinant() > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "matrix is not a proper rotation");
  }
  return {Eigen::Quaterniond(rotation), translation};
}

Eigen::Matrix4d RigidTransform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_matrix();
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

RigidTransform RigidTransform::operator*(const RigidTransform& b) const {
  return {(rotation_ * b.rotation_).normalized(), rotation_ * b.translation_ + translation_};
}

RigidTransform RigidTransform::inverse() const {
  const Eigen::Quaterniond inv = rotation_.conjugate();
  return {inv, -(inv * translation_)};
}

double RigidTransform::rotation_angle() const {
  // atan2 form stays accurate for tiny angles, unlike acos(w).
  return 2.0 * std::atan2(rotation_.vec().norm(), std::abs(rotation_.w()));
}

double rotation_distance(const RigidTransform& a, const RigidTransform& b) {
  const Eigen::Quaterniond rel = a.rotation().conjugate() * b.rotation();
  return 2.0 * std::atan2(rel.vec().norm(), std::abs(rel.w()));
}

double translation_distance(const RigidTransform& a, const RigidTransform& b) {
  return (a.translation() - b.translation()).norm();
}

void CameraIntrinsics::validate() const {
  std::ostringstream os;
  if (!(fx > 0.0) || !(fy > 0.0)) {
    os << "focal lengths must be positive (fx=" << fx << ", fy=" << fy << ")";
  } else if (width <= 0 || height <= 0) {
    os << "image size must be positive (" << width << "x" << height << ")";
  } else if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
    os << "principal point (" << cx << ", " << cy << ") outside " << width << "x" << height;
  } else {
    return;
  }
  throw Error(ErrorKind::InvalidArgument, os.str());
}

Projection project(const CameraIntrinsics& k, const Point3& p_cam) {
  if (!(p_cam.z() > 0.0)) {
    throw Error(ErrorKind::BehindCamera, "point has z <= 0 in camera frame");
  }
  return {k.fx * p_cam.x() / p_cam.z() + k.cx, k.fy * p_cam.y() / p_cam.z() + k.cy, p_cam.z()};
}

Point3 lift(const CameraIntrinsics& k, double u, double v, double depth) {
  if (!(depth > 0.0)) throw Error(ErrorKind::NonPositiveDepth, "depth must be positive");
  return {(u - k.cx) / k.fx * depth, (v - k.cy) / k.fy * depth, depth};
}

bool YawBox::contains(const Point3& p) const {
  const Vec3 d = p - center;
  const double c = std::cos(yaw), s = std::sin(yaw);
  // Offset expressed in the box's own axes.
  const double lx = c * d.x() + s * d.y();
  const double ly = -s * d.x() + c * d.y();
  return std::abs(lx) <= half_extents.x() && std::abs(ly) <= half_extents.y() &&
         std::abs(d.z()) <= half_extents.z();
}

RigidTransform camera_mount(double yaw_rad, double pitch_rad, const Vec3& position) {
  // Columns are the camera axes (x right, y down, z forward) in ego coordinates
  // for a camera looking along ego +x.
  Mat3 base;
  base << 0, 0, 1,
         -1, 0, 0,
          0, -1, 0;
  const Mat3 yaw = Eigen::AngleAxisd(yaw_rad, Vec3::UnitZ()).toRotationMatrix();
  // Pitching down rotates about the camera's own +x axis.
  const Mat3 pitch = Eigen::AngleAxisd(-pitch_rad, Vec3::UnitX()).toRotationMatrix();
  return RigidTransform::from_matrix(yaw * base * pitch, position);
}

}  // namespace drive4d
