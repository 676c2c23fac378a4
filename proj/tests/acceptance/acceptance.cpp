// Acceptance harness: one PASS/FAIL line per criterion, exit 1 on any FAIL.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "drive4d/alignment.hpp"
#include "drive4d/cli.hpp"
#include "drive4d/error.hpp"
#include "drive4d/evaluation.hpp"
#include "drive4d/parallel.hpp"
#include "drive4d/reconstruction.hpp"
#include "drive4d/rendering.hpp"
#include "drive4d/scene_io.hpp"
#include "drive4d/synth.hpp"
#include "support.hpp"

using namespace drive4d;
using testsupport::TempDir;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// Silences the JSON summaries cli::run prints on stdout.
int quiet_run(std::vector<std::string> args) {
  args.insert(args.begin(), "drive4d");
  std::ostringstream sink;
  auto* old = std::cout.rdbuf(sink.rdbuf());
  const int code = cli::run(args);
  std::cout.rdbuf(old);
  return code;
}

Scene4D build_from_manifest(const SceneManifest& m, const AlignmentConfig& cfg = {}) {
  std::vector<FramePointCloud> frames;
  std::vector<RigidTransform> poses;
  for (std::size_t f = 0; f < m.frames.size(); ++f) {
    frames.push_back(reconstruct_frame(m, f, 1));
    poses.push_back(m.frames[f].ego_pose);
  }
  return build_scene4d(frames, poses, cfg);
}

bool inside(const YawBox& b, const Point3& p) {
  const Vec3 d = p - b.center;
  const double c = std::cos(b.yaw), s = std::sin(b.yaw);
  return std::abs(c * d.x() + s * d.y()) <= b.half_extents.x() &&
         std::abs(-s * d.x() + c * d.y()) <= b.half_extents.y() && std::abs(d.z()) <= b.half_extents.z();
}

// ---------------------------------------------------------------------------

Outcome geometry_round_trip() {
  const std::vector<CameraIntrinsics> models{synth::surround_rig(200, 150, 70.0)[0].intrinsics,
                                             {1266.4, 1266.4, 816.3, 491.5, 1600, 900},
                                             {2055.6, 2053.1, 939.7, 641.1, 1920, 1280}};
  std::mt19937_64 rng(1);
  const auto t0 = Clock::now();
  double px = 0, m = 0;
  for (const auto& k : models) {
    std::uniform_real_distribution<double> u(0, k.width), v(0, k.height), d(0.5, 80.0);
    for (int i = 0; i < 10000; ++i) {
      const double uu = u(rng), vv = v(rng), dd = d(rng);
      const Point3 p = lift(k, uu, vv, dd);
      const Projection q = project(k, p);
      px = std::max({px, std::abs(q.u - uu), std::abs(q.v - vv)});
      m = std::max({m, std::abs(q.depth - dd), (lift(k, q.u, q.v, q.depth) - p).norm()});
    }
  }
  const double secs = seconds_since(t0);
  return {px <= 1e-6 && m <= 1e-9 && secs < 1.0,
          fmt("3 models x 10000 samples, max %.2e px, %.2e m, %.3f s", px, m, secs)};
}

Outcome rigid_solve_exactness() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit(-1, 1), angle(0, 3.1);
  const auto t0 = Clock::now();
  double rot = 0, trans = 0;
  for (int i = 0; i < 1000; ++i) {
    Vec3 axis(unit(rng), unit(rng), unit(rng));
    axis.normalize();
    const RigidTransform truth =
        RigidTransform::from_rotation_vector(axis * angle(rng), Vec3(unit(rng), unit(rng), unit(rng)) * 10.0);
    std::vector<Point3> src, dst;
    for (int j = 0; j < 10; ++j) {
      src.emplace_back(unit(rng) * 5, unit(rng) * 5, unit(rng) * 5);
      dst.push_back(truth.apply(src.back()));
    }
    const RigidTransform est = rigid_solve(src, dst);
    rot = std::max(rot, rotation_distance(est, truth));
    trans = std::max(trans, translation_distance(est, truth));
  }
  const double secs = seconds_since(t0);
  return {rot <= 1e-9 && trans <= 1e-9 && secs < 1.0,
          fmt("1000 transforms, max %.2e rad, %.2e m, %.3f s", rot, trans, secs)};
}

Outcome fine_alignment_recovery() {
  TempDir dir("acc_fine");
  const auto spec = testsupport::courtyard_spec(4);
  const auto exact = synth::generate(spec, dir.path());
  const auto perturbed = synth::perturb_poses(exact, 2.0, 0.2, 7);

  std::vector<FramePointCloud> frames;
  std::vector<RigidTransform> poses;
  std::size_t min_points = SIZE_MAX;
  for (std::size_t f = 0; f < exact.frames.size(); ++f) {
    frames.push_back(reconstruct_frame(perturbed.manifest, f, 1));
    poses.push_back(perturbed.manifest.frames[f].ego_pose);
    min_points = std::min(min_points, frames.back().size());
  }
  AlignmentConfig cfg;
  cfg.reference_voxel = 0.1;
  const auto t0 = Clock::now();
  const Scene4D scene = build_scene4d(frames, poses, cfg);
  const double per_frame = seconds_since(t0) / static_cast<double>(frames.size() - 1);

  bool ok = min_points >= 50000 && per_frame < 5.0;
  double worst_rot = 0, worst_trans = 0, worst_rise = -1e300;
  int worst_iter = 0;
  for (std::size_t f = 1; f < frames.size(); ++f) {
    const auto& r = scene.reports[f];
    ok = ok && r.converged && r.fine_aligned && r.failure.empty() && r.iterations <= 50;
    worst_iter = std::max(worst_iter, r.iterations);
    for (std::size_t k = 1; k < r.errors.size(); ++k) {
      worst_rise = std::max(worst_rise, r.errors[k] - r.errors[k - 1]);
    }
    worst_rot = std::max(worst_rot, testsupport::to_deg(rotation_distance(scene.refined_poses[f],
                                                                          exact.frames[f].ego_pose)));
    worst_trans = std::max(worst_trans, translation_distance(scene.refined_poses[f], exact.frames[f].ego_pose));
  }
  ok = ok && worst_rot <= 0.05 && worst_trans <= 0.005 && worst_rise <= 1e-12;
  std::ostringstream os;
  os << fmt("perturb 2 deg / 0.2 m: residual %.4f deg, %.2f mm; ", worst_rot, worst_trans * 1000)
     << min_points << " pts/frame min; " << worst_iter << " iterations max; "
     << fmt("max E_k rise %.1e; %.2f s/frame", worst_rise, per_frame);
  return {ok, os.str()};
}

Outcome coarse_consistency() {
  TempDir dir("acc_coarse");
  auto spec = testsupport::courtyard_spec(3, 160);
  spec.ego.speed = 0.8;
  spec.ego.yaw_rate = 0.06;
  const auto m = synth::generate(spec, dir.path());
  const auto objects = spec.all_objects();

  // Face of the surface hit at p: object index * 8 + axis side, or -1 ground.
  auto face_of = [&](int object, const Point3& p) {
    if (object < 0) return object;
    const Vec3 d = (p - objects[object].center_at(0)).cwiseQuotient(objects[object].half_extents);
    int axis = 0;
    d.cwiseAbs().maxCoeff(&axis);
    return object * 8 + axis * 2 + (d[axis] > 0);
  };

  double worst = 0;
  std::size_t checked = 0;
  for (int t = 0; t + 1 < spec.frame_count; ++t) {
    for (std::size_t c = 0; c < spec.rig.size(); ++c) {
      const auto& k = spec.rig[c].intrinsics;
      // Later frame: engine lift plus coarse alignment.
      const auto& rec1 = m.frames[t + 1].cameras[c];
      const DepthMap depth1 = load_depth(m.resolve(rec1.depth_path), k);
      FramePointCloud view = lift_view(depth1, load_image(m.resolve(rec1.image_path), k), k, rec1.extrinsic, 1,
                                       static_cast<std::uint8_t>(c));
      view = fuse_frame(std::span(&view, 1), m.frames[t + 1]);
      const FramePointCloud world1 = coarse_align(view, m.frames[t + 1].ego_pose);
      const RigidTransform cam1 = m.frames[t + 1].ego_pose * rec1.extrinsic;
      const auto truth1 = synth::raycast(spec, spec.time_of(t + 1), cam1, k);

      // Earlier frame: measured depth of the same surface along its own rays.
      const auto& rec0 = m.frames[t].cameras[c];
      const DepthMap depth0 = load_depth(m.resolve(rec0.depth_path), k);
      const RigidTransform cam0 = m.frames[t].ego_pose * rec0.extrinsic;
      const auto truth0 = synth::raycast(spec, spec.time_of(t), cam0, k);
      auto face0 = [&](int x, int y) {
        const Point3 p = cam0.apply(lift(k, x + 0.5, y + 0.5, truth0.depth_at(x, y)));
        return face_of(truth0.hit_at(x, y), p);
      };

      std::size_t i = 0;
      for (int y = 0; y < k.height; ++y) {
        for (int x = 0; x < k.width; ++x) {
          if (!depth1.valid(x, y)) continue;
          const Point3 X = world1.points[i++].point();
          if ((X - cam1.translation()).norm() > 10.0) continue;
          const Point3 q = cam0.inverse().apply(X);
          if (q.z() <= 0.1) continue;
          const Projection pr = project(k, q);
          const int x0 = static_cast<int>(std::floor(pr.u - 0.5)), y0 = static_cast<int>(std::floor(pr.v - 0.5));
          if (x0 < 0 || y0 < 0 || x0 + 1 >= k.width || y0 + 1 >= k.height) continue;
          const Point3 X_true = cam1.apply(lift(k, x + 0.5, y + 0.5, truth1.depth_at(x, y)));
          const int face = face_of(truth1.hit_at(x, y), X_true);
          bool same = true;
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx)
              same = same && depth0.valid(x0 + dx, y0 + dy) && face0(x0 + dx, y0 + dy) == face;
          if (!same) continue;
          // Inverse depth is affine in the image over a plane.
          const double fx = pr.u - 0.5 - x0, fy = pr.v - 0.5 - y0;
          auto inv = [&](int dx, int dy) { return 1.0 / depth0.meters(x0 + dx, y0 + dy); };
          const double inv_z = (1 - fy) * ((1 - fx) * inv(0, 0) + fx * inv(1, 0)) +
                               fy * ((1 - fx) * inv(0, 1) + fx * inv(1, 1));
          const Point3 Y = cam0.apply(lift(k, pr.u, pr.v, 1.0 / inv_z));
          worst = std::max(worst, (X - Y).norm());
          ++checked;
        }
      }
    }
  }
  std::ostringstream os;
  os << checked << fmt(" static correspondences within 10 m, max gap %.3f mm", worst * 1000);
  return {checked > 10000 && worst <= 0.002, os.str()};
}

Outcome self_reprojection() {
  TempDir dir("acc_self");
  synth::SynthSpec spec;
  spec.frame_count = 2;
  const CameraIntrinsics k{90, 90, 80, 60, 160, 120};
  spec.rig.push_back({"CAM_FRONT", k, camera_mount(0, testsupport::deg(35), {0, 0, 1.6})});
  spec.ego.speed = 0.5;
  const auto m = synth::generate(spec, dir.path());
  const Scene4D scene = build_from_manifest(m);
  const int t = 1;
  const auto r = render_keyframe(scene, {refined_camera_pose(scene, m, t, 0), {t}, k, 0});
  const auto source = load_image(m.resolve(m.frames[t].cameras[0].image_path), k);
  std::size_t mismatched = 0;
  for (int y = 0; y < k.height; ++y)
    for (int x = 0; x < k.width; ++x)
      if (r.occupied(x, y) && r.color.at(x, y) != source.at(x, y)) ++mismatched;
  const double p = psnr(r.color, source, &r.occupancy);
  std::ostringstream os;
  os << r.occupied_count() << " of " << scene.frames[t].size() << " points shown, " << mismatched
     << " mismatched pixels, masked PSNR " << p << " dB";
  return {mismatched == 0 && r.occupied_count() == scene.frames[t].size() && p == kPsnrCap, os.str()};
}

Outcome frozen_time_parallax() {
  TempDir dir("acc_parallax");
  synth::SynthSpec spec;
  const CameraIntrinsics k{120, 120, 80, 60, 160, 120};
  spec.rig.push_back({"CAM_FRONT", k, camera_mount(0, 0, {0, 0, 1.6})});
  const synth::SynthObject landmark = testsupport::box({20.05, 0, 1.6}, {0.05, 0.5, 0.5}, {240, 40, 40});
  spec.objects.push_back(landmark);
  const auto m = synth::generate(spec, dir.path());
  const Scene4D scene = build_from_manifest(m);

  const RigidTransform base = refined_camera_pose(scene, m, 0, 0);
  const std::vector<RigidTransform> poses{base, base * RigidTransform::from_translation({2.0, 0, 0})};
  const auto renders = render_frozen_time(scene, 0, poses, k);
  auto centroid_u = [&](const KeyframeRender& r) {
    double sum = 0;
    std::size_t n = 0;
    for (int y = 0; y < k.height; ++y)
      for (int x = 0; x < k.width; ++x) {
        const PointRef ref = r.source[static_cast<std::size_t>(y) * k.width + x];
        if (!ref.valid()) continue;
        const Point3 p = scene.frames[ref.frame].points[ref.index].point();
        if (((p - landmark.center).cwiseAbs() - landmark.half_extents).maxCoeff() > 0.01) continue;
        sum += x + 0.5;
        ++n;
      }
    return n ? sum / static_cast<double>(n) : std::nan("");
  };
  const double measured = centroid_u(renders[1]) - centroid_u(renders[0]);

  synth::SynthSpec shifted = spec;
  shifted.ego.y0 = -2.0;  // camera +x is ego -y for a forward mount
  const Point3 face(20.0, 0, 1.6);
  const double oracle = synth::analytic_pixel(shifted, 0, 0, face).u - synth::analytic_pixel(spec, 0, 0, face).u;
  const double formula = k.fx * 2.0 / 20.0;
  const bool ok = std::abs(measured - oracle) <= 0.5 && std::abs(std::abs(oracle) - formula) < 1e-9;
  return {ok, fmt("centroid shift %.3f px, oracle %.3f px, fx*2/20 = %.3f px", measured, oracle, formula)};
}

Outcome frozen_space_motion() {
  TempDir dir("acc_motion");
  synth::SynthSpec spec;
  spec.frame_count = 4;
  spec.frame_dt = 1.0;
  const CameraIntrinsics k{100, 100, 80, 60, 160, 120};
  spec.rig.push_back({"CAM_FRONT", k, camera_mount(0, testsupport::deg(10), {0, 0, 1.6})});
  synth::SynthObject mover = testsupport::box({10, -2, 1.0}, {0.5, 0.5, 0.5}, {250, 200, 0});
  mover.dynamic = true;
  mover.velocity = {0, 1.0, 0};
  spec.objects.push_back(mover);
  const auto m = synth::generate(spec, dir.path());
  // Ground plus one excluded mover leaves in-plane motion unobservable to ICP,
  // so the scene is composed from oracle poses after coarse alignment.
  Scene4D scene;
  for (std::size_t f = 0; f < m.frames.size(); ++f) {
    scene.frames.push_back(coarse_align(reconstruct_frame(m, f, 1), m.frames[f].ego_pose));
    scene.ego_poses.push_back(m.frames[f].ego_pose);
    scene.refined_poses.push_back(m.frames[f].ego_pose);
    scene.reports.emplace_back();
  }

  const RigidTransform camera = refined_camera_pose(scene, m, 0, 0);
  const std::vector<int> times{0, 1, 2, 3};
  const auto renders = render_frozen_space(scene, camera, times, k);
  auto near_box = [&](const Point3& p, int f, double tol) {
    return ((p - mover.center_at(spec.time_of(f))).cwiseAbs() - mover.half_extents).maxCoeff() <= tol;
  };

  double worst_centroid = 0;
  for (int f = 0; f < 4; ++f) {
    // Front face (x = center - 0.5) pixels against the projection of its center.
    const Point3 face_center = mover.center_at(spec.time_of(f)) - Vec3(0.5, 0, 0);
    double su = 0, sv = 0;
    std::size_t n = 0;
    for (int y = 0; y < k.height; ++y)
      for (int x = 0; x < k.width; ++x) {
        const PointRef ref = renders[f].source[static_cast<std::size_t>(y) * k.width + x];
        if (!ref.valid()) continue;
        const Point3 p = scene.frames[ref.frame].points[ref.index].point();
        if (!near_box(p, f, 0.01) || std::abs(p.x() - face_center.x()) > 0.01) continue;
        su += x + 0.5;
        sv += y + 0.5;
        ++n;
      }
    const Projection oracle = synth::analytic_pixel(spec, f, 0, face_center);
    worst_centroid = n ? std::max({worst_centroid, std::abs(su / n - oracle.u), std::abs(sv / n - oracle.v)}) : 1e9;
  }

  std::size_t static_pixels = 0, differing = 0;
  for (int y = 0; y < k.height; ++y)
    for (int x = 0; x < k.width; ++x) {
      const std::size_t pix = static_cast<std::size_t>(y) * k.width + x;
      bool is_static = true;
      for (int f = 0; f < 4 && is_static; ++f) {
        const PointRef ref = renders[f].source[pix];
        if (!ref.valid()) {
          is_static = false;
          break;
        }
        const Point3 p = scene.frames[ref.frame].points[ref.index].point();
        for (int g = 0; g < 4; ++g) is_static = is_static && !near_box(p, g, 0.05);
      }
      if (!is_static) continue;
      ++static_pixels;
      for (int f = 1; f < 4; ++f) {
        if (renders[f].color.at(x, y) != renders[0].color.at(x, y) ||
            std::abs(renders[f].depth[pix] - renders[0].depth[pix]) > 1e-3f) {
          ++differing;
          break;
        }
      }
    }
  std::ostringstream os;
  os << fmt("max front-face centroid error %.3f px; ", worst_centroid) << static_pixels
     << " static checker pixels, " << differing << " differ";
  return {worst_centroid <= 1.0 && static_pixels > 10000 && differing == 0, os.str()};
}

struct PairSetup {
  TempDir dir{"acc_pairs"};
  SceneManifest manifest;
  Scene4D scene;
  PairSetup() {
    auto spec = testsupport::courtyard_spec(8, 64);
    spec.ego.speed = 0.5;
    manifest = synth::generate(spec, dir.path());
    scene = build_from_manifest(manifest);
  }
};

Outcome pair_export(const PairSetup& s) {
  const auto pairs = export_training_pairs(s.scene, s.manifest);
  bool ok = pairs.size() == 24;
  std::size_t byte_equal = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    const int n = static_cast<int>(i / 6);
    // 1-based labels: target 2n+1 conditioned on the cloud of frame 2n+2.
    ok = ok && p.target_frame + 1 == 2 * n + 1 && p.condition_frame + 1 == 2 * n + 2 &&
         p.camera == static_cast<int>(i % 6);
    const auto& cam = s.manifest.frames[p.target_frame].cameras[p.camera];
    const RenderControl direct{s.scene.refined_poses[p.target_frame] * cam.extrinsic, {p.condition_frame},
                               cam.intrinsics, 0};
    const KeyframeRender r = render_keyframe(s.scene, direct);
    byte_equal += (r == p.condition && r.occupied_count() > 0);
  }
  ok = ok && byte_equal == pairs.size();
  std::ostringstream os;
  os << pairs.size() << " pairs, (2n+2 -> 2n+1) pattern " << (ok ? "holds" : "broken") << ", " << byte_equal
     << " byte-equal to direct renders";
  return {ok, os.str()};
}

Outcome removal(const PairSetup& s) {
  Scene4D scene = s.scene;
  const int frame = 3;
  const Point3 center = scene.refined_poses[frame].apply(Point3(5.0, 0.0, 2.2));
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  const std::size_t first = scene.frames[frame].size();
  for (int i = 0; i < 100; ++i) {
    CloudPoint p;
    p.position = to_float3(center + Vec3(u(rng), u(rng), u(rng)));
    p.color = {255, 0, 255};
    scene.frames[frame].points.push_back(p);
  }
  const RemovalBox box{{center, {0.3, 0.3, 0.3}, 0.4}, frame, frame};
  std::size_t flagged = 0;
  const Scene4D out = remove_objects(scene, std::span(&box, 1), &flagged);

  std::size_t oracle = 0, mismatch = 0, cluster_hits = 0;
  for (std::size_t f = 0; f < scene.size(); ++f) {
    for (std::size_t i = 0; i < scene.frames[f].size(); ++i) {
      const bool expect = static_cast<int>(f) == frame && inside(box.box, scene.frames[f].points[i].point());
      oracle += expect;
      const bool cluster = static_cast<int>(f) == frame && i >= first;
      mismatch += (out.frames[f].points[i].removed() != expect) + (expect != cluster);
    }
  }

  std::vector<int> all(scene.size());
  std::iota(all.begin(), all.end(), 0);
  std::size_t traced = 0;
  for (std::size_t c = 0; c < s.manifest.rig.size(); ++c) {
    const auto& cam = s.manifest.frames[frame].cameras[c];
    const RenderControl ctl{refined_camera_pose(scene, s.manifest, frame, static_cast<int>(c)), all,
                            cam.intrinsics, 1};
    for (const PointRef& ref : render_keyframe(scene, ctl).source)
      cluster_hits += ref.valid() && ref.frame == frame && ref.index >= static_cast<int>(first);
    for (const PointRef& ref : render_keyframe(out, ctl).source)
      traced += ref.valid() && out.frames[ref.frame].points[ref.index].removed();
  }
  std::ostringstream os;
  os << flagged << " flagged, oracle " << oracle << ", " << mismatch << " disagreements; cluster covered "
     << cluster_hits << " pixels before removal, " << traced << " flagged pixels after";
  return {flagged == 100 && oracle == 100 && mismatch == 0 && cluster_hits > 0 && traced == 0, os.str()};
}

Outcome metrics() {
  ColorImage a(64, 48), b(64, 48);
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    a.data[i] = static_cast<std::uint8_t>((i * 37) % 255);
    b.data[i] = static_cast<std::uint8_t>(a.data[i] + 1);
  }
  const double p = psnr(a, b);
  const double s = ssim(a, a);
  std::mt19937_64 rng(10);
  bool symmetric = true;
  for (int i = 0; i < 20; ++i) {
    ColorImage x(32, 32), y(32, 32);
    for (auto& v : x.data) v = static_cast<std::uint8_t>(rng());
    for (auto& v : y.data) v = static_cast<std::uint8_t>(rng());
    symmetric = symmetric && psnr(x, y) == psnr(y, x);
  }
  return {std::abs(p - 48.13) <= 0.01 && std::abs(s - 1.0) <= 1e-9 && symmetric,
          fmt("psnr(+1) = %.4f dB, ssim(a,a) - 1 = %.1e, symmetry ", p, s - 1.0) +
              (symmetric ? "exact" : "BROKEN")};
}

std::map<std::string, std::vector<std::uint8_t>> tree_bytes(const fs::path& root) {
  std::map<std::string, std::vector<std::uint8_t>> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = read_file_bytes(e.path());
  }
  return out;
}

Outcome determinism() {
  TempDir dir("acc_det");
  write_text_file(dir / "synth.json", R"({
    "scene_id": "det", "frame_count": 4, "random_boxes": 25, "random_extent": 9,
    "rig": {"width": 64, "height": 48, "hfov_deg": 70, "pitch_deg": 10},
    "ego": {"speed": 0.2, "yaw_rate": 0.01},
    "objects": [
      {"center": [12, 0, 2], "half_extents": [0.5, 12, 2]},
      {"center": [-12, 0, 2], "half_extents": [0.5, 12, 2]},
      {"center": [0, 12, 2], "half_extents": [12, 0.5, 2]},
      {"center": [0, -12, 2], "half_extents": [12, 0.5, 2]},
      {"center": [5, 2, 1], "half_extents": [0.5, 0.5, 0.5], "velocity": [0, -0.5, 0], "dynamic": true}]
  })");
  write_text_file(dir / "traj.json", R"({"mode": "free", "base_frame": 1, "camera": "CAM_FRONT",
    "splat_radius": 1, "steps": [{"time": 0}, {"time": 2, "pose_delta": {"translation": [0.5, 0, 0]}},
    {"time": 3, "pose_delta": {"rotation": [0.998750260394966, 0, 0.049979169270678, 0]}}]})");
  bool ok = quiet_run({"synth", "--config", (dir / "synth.json").string(), (dir / "raw").string()}) == 0;
  const std::string manifest = (dir / "raw" / "manifest.json").string();
  const unsigned n = std::max(4u, std::thread::hardware_concurrency());
  for (unsigned threads : {1u, n}) {
    const std::string tag = std::to_string(threads);
    ok = ok && quiet_run({"--threads", tag, "build", manifest, (dir / ("scene" + tag)).string()}) == 0;
    ok = ok && quiet_run({"--threads", tag, "render", "--config", (dir / "traj.json").string(),
                          (dir / ("scene" + tag)).string(), (dir / ("render" + tag)).string()}) == 0;
  }
  set_thread_count(0);
  if (!ok) return {false, "a build or render run failed"};
  const auto s1 = tree_bytes(dir / "scene1"), sn = tree_bytes(dir / ("scene" + std::to_string(n)));
  const auto r1 = tree_bytes(dir / "render1"), rn = tree_bytes(dir / ("render" + std::to_string(n)));
  std::ostringstream os;
  os << "threads 1 vs " << n << ": " << s1.size() << " build files " << (s1 == sn ? "identical" : "DIFFER") << ", "
     << r1.size() << " render files " << (r1 == rn ? "identical" : "DIFFER");
  return {s1 == sn && r1 == rn && s1.size() >= 3 && r1.size() == 10, os.str()};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
  };
  report(1, "geometry round-trip", geometry_round_trip);
  report(2, "rigid-solve exactness", rigid_solve_exactness);
  report(3, "fine-alignment recovery", fine_alignment_recovery);
  report(4, "coarse-alignment consistency", coarse_consistency);
  report(5, "self-reprojection", self_reprojection);
  report(6, "frozen-time parallax", frozen_time_parallax);
  report(7, "frozen-space motion", frozen_space_motion);
  const PairSetup pairs;
  report(8, "pair export", [&] { return pair_export(pairs); });
  report(9, "removal", [&] { return removal(pairs); });
  report(10, "metrics", metrics);
  report(11, "determinism", determinism);
  return failures == 0 ? 0 : 1;
}
