#include "drive4d/alignment.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <sstream>

#include "drive4d/error.hpp"
#include "drive4d/kdtree.hpp"
#include "drive4d/log.hpp"
#include "drive4d/parallel.hpp"
#include "drive4d/reconstruction.hpp"

namespace drive4d {

void AlignmentConfig::validate() const {
  if (max_iterations <= 0 || !(rel_tolerance > 0.0) || !(rel_tolerance < 1.0) ||
      !(max_correspondence_distance > 0.0) || min_correspondences <= 0 || !(reference_voxel > 0.0) ||
      !(source_voxel >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "alignment config values must be positive, rel_tolerance < 1");
  }
}

FramePointCloud coarse_align(const FramePointCloud& cloud, const RigidTransform& ego_pose) {
  if (cloud.tag != FrameTag::Ego) {
    throw Error(ErrorKind::WrongFrameTag, "coarse_align expects an ego-frame cloud");
  }
  FramePointCloud out = cloud;
  out.tag = FrameTag::World;
  for (auto& p : out.points) p.position = to_float3(ego_pose.apply(p.point()));
  return out;
}

RigidTransform rigid_solve(std::span<const Point3> source, std::span<const Point3> target) {
  if (source.size() != target.size()) {
    throw Error(ErrorKind::InvalidArgument, "source/target sizes differ");
  }
  const std::size_t n = source.size();
  if (n < 3) {
    throw Error(ErrorKind::DegenerateConfiguration,
                "rigid solve needs >= 3 correspondences, got " + std::to_string(n));
  }
  Point3 cs = Point3::Zero(), ct = Point3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    cs += source[i];
    ct += target[i];
  }
  cs /= static_cast<double>(n);
  ct /= static_cast<double>(n);

  Mat3 cross = Mat3::Zero();
  Mat3 scatter = Mat3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 a = source[i] - cs;
    cross.noalias() += a * (target[i] - ct).transpose();
    scatter.noalias() += a * a.transpose();
  }

  const Eigen::JacobiSVD<Mat3> scatter_svd(scatter);
  const Vec3 spread = scatter_svd.singularValues();
  if (!(spread[0] > 0.0) || spread[1] <= 1e-12 * spread[0]) {
    throw Error(ErrorKind::DegenerateConfiguration, "source points are collinear or coincident");
  }

  const Eigen::JacobiSVD<Mat3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Mat3 d = Mat3::Identity();
  if ((v * u.transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  const Mat3 r = v * d * u.transpose();
  const Eigen::Quaterniond q(r);
  return {q.normalized(), ct - q.normalized() * cs};
}

RigidTransform rigid_solve(std::span<const Correspondence> pairs) {
  std::vector<Point3> s, t;
  s.reserve(pairs.size());
  t.reserve(pairs.size());
  for (const auto& c : pairs) {
    s.push_back(c.source);
    t.push_back(c.target);
  }
  return rigid_solve(s, t);
}

namespace {

std::vector<Point3> considered_points(const FramePointCloud& cloud, bool exclude_dynamic) {
  std::vector<Point3> out;
  out.reserve(cloud.size());
  for (const auto& p : cloud.points) {
    if (exclude_dynamic && p.dynamic()) continue;
    out.push_back(p.point());
  }
  return out;
}

}  // namespace

FineAlignResult fine_align(const FramePointCloud& source, const FramePointCloud& reference,
                           const AlignmentConfig& cfg) {
  cfg.validate();
  if (source.tag != FrameTag::World || reference.tag != FrameTag::World) {
    throw Error(ErrorKind::WrongFrameTag, "fine_align expects world-frame clouds");
  }
  const std::vector<Point3> src = considered_points(source, cfg.exclude_dynamic);
  if (src.empty()) {
    throw Error(ErrorKind::InsufficientCorrespondences, "source has no points to align");
  }
  const KdTree3 tree(considered_points(reference, cfg.exclude_dynamic));
  if (tree.size() == 0) {
    throw Error(ErrorKind::InsufficientCorrespondences, "reference has no points to align against");
  }

  const double gate2 = cfg.max_correspondence_distance * cfg.max_correspondence_distance;
  const std::size_t n = src.size();
  constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> match(n);
  std::vector<double> dist2(n);
  std::vector<Point3> solve_src, solve_dst;

  FineAlignResult result;
  AlignmentReport& report = result.report;
  report.fine_aligned = true;
  RigidTransform estimate;

  for (int k = 1; k <= cfg.max_iterations; ++k) {
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const auto nn = tree.nearest(estimate.apply(src[i]), gate2);
        match[i] = nn ? nn->index : kNone;
        dist2[i] = nn ? nn->squared_distance : gate2;
      }
    });

    // Fixed-order reductions keep the report independent of thread count.
    double truncated = 0.0, inlier = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      truncated += dist2[i];
      if (match[i] != kNone) {
        inlier += dist2[i];
        ++count;
      }
    }
    const double e_k = truncated / static_cast<double>(n);
    report.errors.push_back(e_k);
    report.inlier_errors.push_back(count ? inlier / static_cast<double>(count) : 0.0);
    report.correspondence_count.push_back(count);
    report.iterations = k;
    if (cfg.keep_correspondences) {
      auto& pairs = report.correspondence_pairs.emplace_back();
      for (std::size_t i = 0; i < n; ++i) {
        if (match[i] != kNone) pairs.emplace_back(static_cast<std::uint32_t>(i), match[i]);
      }
    }

    if (count < static_cast<std::size_t>(cfg.min_correspondences)) {
      std::ostringstream os;
      os << "iteration " << k << " found " << count << " correspondences within "
         << cfg.max_correspondence_distance << " m (need " << cfg.min_correspondences << ")";
      throw Error(ErrorKind::InsufficientCorrespondences, os.str());
    }
    if (e_k < 1e-12) {
      report.converged = true;
      break;
    }
    if (k > 1) {
      const double prev = report.errors[report.errors.size() - 2];
      if ((prev - e_k) / prev < cfg.rel_tolerance) {
        report.converged = true;
        break;
      }
    }

    solve_src.clear();
    solve_dst.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (match[i] == kNone) continue;
      solve_src.push_back(src[i]);
      solve_dst.push_back(tree.point(match[i]));
    }
    estimate = rigid_solve(solve_src, solve_dst);
  }
  result.correction = estimate;
  return result;
}

Scene4D build_scene4d(std::span<const FramePointCloud> frames,
                      std::span<const RigidTransform> ego_poses, const AlignmentConfig& cfg) {
  cfg.validate();
  if (frames.empty()) throw Error(ErrorKind::InvalidArgument, "build_scene4d needs >= 1 frame");
  if (frames.size() != ego_poses.size()) {
    throw Error(ErrorKind::InvalidArgument, "frame and pose counts differ");
  }
  Scene4D scene;
  scene.ego_poses.assign(ego_poses.begin(), ego_poses.end());

  FramePointCloud reference;
  reference.tag = FrameTag::World;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (frames[t].frame_index != static_cast<int>(t)) {
      throw Error(ErrorKind::InvalidArgument, "frames must be sorted with contiguous indices");
    }
    FramePointCloud world = coarse_align(frames[t], ego_poses[t]);
    RigidTransform refined = ego_poses[t];
    AlignmentReport report;
    report.converged = true;

    if (t > 0) {
      try {
        FineAlignResult fine =
            cfg.source_voxel > 0.0 ? fine_align(voxel_downsample(world, cfg.source_voxel), reference, cfg)
                                   : fine_align(world, reference, cfg);
        refined = fine.correction * ego_poses[t];
        report = std::move(fine.report);
        // Re-lift from ego coordinates so the correction is applied once, in double.
        for (std::size_t i = 0; i < world.points.size(); ++i) {
          world.points[i].position = to_float3(refined.apply(frames[t].points[i].point()));
        }
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::InsufficientCorrespondences &&
            e.kind() != ErrorKind::DegenerateConfiguration) {
          throw;
        }
        log::warn("frame " + std::to_string(t) + ": fine alignment failed, keeping coarse pose (" +
                  e.what() + ")");
        report = AlignmentReport{};
        report.failure = e.what();
      }
    }
    log::debug("frame " + std::to_string(t) + ": " + std::to_string(report.iterations) +
               " iterations, converged=" + (report.converged ? "true" : "false"));

    // Reference accumulates every aligned frame, voxel-downsampled.
    FramePointCloud merged = std::move(reference);
    const FramePointCloud sparse = voxel_downsample(world, cfg.reference_voxel);
    merged.points.insert(merged.points.end(), sparse.points.begin(), sparse.points.end());
    reference = voxel_downsample(merged, cfg.reference_voxel);

    scene.frames.push_back(std::move(world));
    scene.refined_poses.push_back(refined);
    scene.reports.push_back(std::move(report));
  }
  return scene;
}

}  // namespace drive4d
