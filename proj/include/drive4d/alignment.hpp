#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "drive4d/geometry.hpp"
#include "drive4d/point_cloud.hpp"

namespace drive4d {

struct AlignmentConfig {
  int max_iterations = 50;
  double rel_tolerance = 1e-6;
  double max_correspondence_distance = 1.0;  // meters
  int min_correspondences = 100;
  bool exclude_dynamic = true;
  double reference_voxel = 0.1;  // meters, downsampling of the accumulated reference
  // Downsampling of each frame before it is aligned; 0 aligns every lifted point.
  double source_voxel = 0.0;
  // Record per-iteration (source, reference) index pairs in the report.
  bool keep_correspondences = false;

  void validate() const;  // InvalidArgument
};

struct AlignmentReport {
  // Per-iteration objective: mean over considered source points of
  // min(d^2, max_correspondence_distance^2), d = nearest-reference distance
  // under the current estimate (m^2). Non-increasing by construction.
  std::vector<double> errors;
  // Mean squared distance over gated correspondences only (m^2).
  std::vector<double> inlier_errors;
  std::vector<std::size_t> correspondence_count;
  int iterations = 0;
  bool converged = false;
  bool fine_aligned = false;  // false when only coarse alignment was applied
  std::string failure;        // set when fine alignment raised

  // Indices into the considered source/reference clouds (not filtered).
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> correspondence_pairs;
};

struct Correspondence {
  Point3 source;
  Point3 target;
};

// Ego-to-world mapping of every point by `ego_pose`. WrongFrameTag unless the
// cloud is ego-tagged.
FramePointCloud coarse_align(const FramePointCloud& cloud, const RigidTransform& ego_pose);

// Closed-form least-squares rigid fit (centroids + SVD of the cross
// covariance, reflection corrected). DegenerateConfiguration for fewer than 3
// pairs or collinear sources.
RigidTransform rigid_solve(std::span<const Correspondence> pairs);
RigidTransform rigid_solve(std::span<const Point3> source, std::span<const Point3> target);

struct FineAlignResult {
  RigidTransform correction;  // maps original source positions onto the reference
  AlignmentReport report;
};

// Point-to-point ICP of a world-tagged source against a world-tagged
// reference. InsufficientCorrespondences when any iteration has fewer than
// cfg.min_correspondences gated pairs, or nothing is left to align.
FineAlignResult fine_align(const FramePointCloud& source, const FramePointCloud& reference,
                           const AlignmentConfig& cfg);

struct Scene4D {
  std::vector<FramePointCloud> frames;       // world-tagged, index-contiguous
  std::vector<RigidTransform> ego_poses;     // as recorded
  std::vector<RigidTransform> refined_poses; // ego-to-world after fine alignment
  std::vector<AlignmentReport> reports;

  std::size_t size() const { return frames.size(); }
};

// Frame 0 is coarse-aligned only and seeds the reference; every later frame is
// coarse-aligned, then fine-aligned against the voxel-downsampled union of
// the frames before it. A frame whose fine alignment raises keeps its coarse
// placement and reports converged = false.
Scene4D build_scene4d(std::span<const FramePointCloud> frames,
                      std::span<const RigidTransform> ego_poses, const AlignmentConfig& cfg);

}  // namespace drive4d
