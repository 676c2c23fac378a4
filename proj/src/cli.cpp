#include "drive4d/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "drive4d/evaluation.hpp"
#include "drive4d/log.hpp"
#include "drive4d/parallel.hpp"
#include "drive4d/reconstruction.hpp"
#include "drive4d/synth.hpp"

namespace drive4d::cli {

using nlohmann::json;
namespace fs = std::filesystem;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InsufficientCorrespondences:
    case ErrorKind::DegenerateConfiguration:
    case ErrorKind::EmptySelection:
    case ErrorKind::EmptyMask:
    case ErrorKind::BehindCamera:
    case ErrorKind::NonPositiveDepth:
    case ErrorKind::MixedFrames:
    case ErrorKind::WrongFrameTag:
      return kExitProcessing;
    default:
      return kExitInput;
  }
}

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
}

template <typename F>
auto parse_guard(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, where + ": " + e.what());
  }
}

}  // namespace

void JobConfig::validate() const {
  if (manifest.empty()) throw Error(ErrorKind::InvalidArgument, "job config: manifest path missing");
  if (output_dir.empty()) throw Error(ErrorKind::InvalidArgument, "job config: output dir missing");
  if (stride < 1) throw Error(ErrorKind::InvalidArgument, "job config: stride must be >= 1");
  if (!(voxel > 0.0)) throw Error(ErrorKind::InvalidArgument, "job config: voxel must be positive");
  alignment.validate();
}

AlignmentConfig alignment_config_from_json(const json& j) {
  return parse_guard("alignment config", [&] {
    AlignmentConfig c;
    c.max_iterations = j.value("max_iterations", c.max_iterations);
    c.rel_tolerance = j.value("rel_tolerance", c.rel_tolerance);
    c.max_correspondence_distance = j.value("max_correspondence_distance", c.max_correspondence_distance);
    c.min_correspondences = j.value("min_correspondences", c.min_correspondences);
    c.exclude_dynamic = j.value("exclude_dynamic", c.exclude_dynamic);
    c.reference_voxel = j.value("reference_voxel", c.reference_voxel);
    c.source_voxel = j.value("source_voxel", c.source_voxel);
    return c;
  });
}

json to_json(const AlignmentConfig& c) {
  return {{"max_iterations", c.max_iterations},
          {"rel_tolerance", c.rel_tolerance},
          {"max_correspondence_distance", c.max_correspondence_distance},
          {"min_correspondences", c.min_correspondences},
          {"exclude_dynamic", c.exclude_dynamic},
          {"reference_voxel", c.reference_voxel},
          {"source_voxel", c.source_voxel}};
}

json to_json(const AlignmentReport& r) {
  return {{"errors", r.errors},
          {"inlier_errors", r.inlier_errors},
          {"correspondence_count", r.correspondence_count},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"fine_aligned", r.fine_aligned},
          {"failure", r.failure}};
}

JobConfig job_config_from_json(const json& j) {
  return parse_guard("job config", [&] {
    JobConfig c;
    if (j.contains("manifest")) c.manifest = j.at("manifest").get<std::string>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("alignment")) c.alignment = alignment_config_from_json(j.at("alignment"));
    c.stride = j.value("stride", c.stride);
    c.voxel = j.value("voxel", c.alignment.reference_voxel);
    c.alignment.reference_voxel = c.voxel;
    if (j.contains("removal_boxes")) c.removal_boxes = j.at("removal_boxes").get<std::string>();
    c.export_ply = j.value("export_ply", c.export_ply);
    return c;
  });
}

TrajectorySpec trajectory_from_json(const json& j) {
  auto bad = [](const std::string& m) { return Error(ErrorKind::InvalidTrajectory, m); };
  try {
    TrajectorySpec t;
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "frozen_time") t.mode = TrajectoryMode::FrozenTime;
    else if (mode == "frozen_space") t.mode = TrajectoryMode::FrozenSpace;
    else if (mode == "free") t.mode = TrajectoryMode::Free;
    else throw bad("unknown mode '" + mode + "'");
    t.base_frame = j.value("base_frame", 0);
    t.camera = j.at("camera").get<std::string>();
    if (j.contains("intrinsics")) t.intrinsics = intrinsics_from_json(j.at("intrinsics"));
    t.splat_radius = j.value("splat_radius", 0);
    const json& steps = j.at("steps");
    if (!steps.is_array() || steps.empty()) throw bad("steps must be a non-empty list");
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const json& s = steps[i];
      const std::string where = "step " + std::to_string(i);
      TrajectoryStep step;
      if (s.contains("time")) step.time = s.at("time").get<int>();
      if (s.contains("pose_delta")) {
        json d = s.at("pose_delta");
        if (!d.contains("rotation")) d["rotation"] = {1.0, 0.0, 0.0, 0.0};
        if (!d.contains("translation")) d["translation"] = {0.0, 0.0, 0.0};
        try {
          step.pose_delta = transform_from_json(d);
        } catch (const Error& e) {
          throw bad(where + ": " + e.what());
        }
      }
      switch (t.mode) {
        case TrajectoryMode::FrozenTime:
          if (step.time) throw bad(where + ": frozen_time steps must not carry a time");
          if (!step.pose_delta) throw bad(where + ": frozen_time steps need a pose_delta");
          break;
        case TrajectoryMode::FrozenSpace:
          if (step.pose_delta) throw bad(where + ": frozen_space steps must not carry a pose_delta");
          if (!step.time) throw bad(where + ": frozen_space steps need a time");
          break;
        case TrajectoryMode::Free:
          if (!step.time && !step.pose_delta) throw bad(where + ": free steps need time or pose_delta");
          break;
      }
      t.steps.push_back(step);
    }
    return t;
  } catch (const json::exception& e) {
    throw bad(std::string("trajectory: ") + e.what());
  }
}

RigidTransform SceneArtifact::camera_pose(int frame, int camera) const {
  return scene.refined_poses.at(frame) * cameras.at(frame).at(camera).extrinsic;
}

int SceneArtifact::camera_index(const std::string& name) const {
  for (std::size_t i = 0; i < rig.size(); ++i) {
    if (rig[i] == name) return static_cast<int>(i);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown camera '" + name + "'");
}

void save_artifact(const SceneArtifact& a, const fs::path& dir) {
  ensure_dir(dir);
  json frames = json::array();
  json reports = json::array();
  for (std::size_t f = 0; f < a.scene.size(); ++f) {
    json cams = json::array();
    for (const auto& c : a.cameras.at(f)) {
      cams.push_back({{"name", c.name}, {"intrinsics", to_json(c.intrinsics)},
                      {"extrinsic", to_json(c.extrinsic)}, {"image_path", c.image_path},
                      {"depth_path", c.depth_path}});
    }
    frames.push_back({{"index", f},
                      {"timestamp", a.scene.frames[f].timestamp},
                      {"ego_pose", to_json(a.scene.ego_poses[f])},
                      {"refined_pose", to_json(a.scene.refined_poses[f])},
                      {"point_count", a.scene.frames[f].size()},
                      {"cameras", cams}});
    json r = to_json(a.scene.reports[f]);
    r["frame"] = f;
    reports.push_back(r);
  }
  const json doc = {{"scene_id", a.scene_id},
                    {"manifest", a.manifest_path.string()},
                    {"rig", a.rig},
                    {"cloud", "cloud.stg4"},
                    {"frames", frames}};
  write_text_file(dir / "scene.json", doc.dump(2) + "\n");
  write_text_file(dir / "alignment_report.json",
                  json{{"scene_id", a.scene_id}, {"frames", reports}}.dump(2) + "\n");
  save_cloud(a.scene.frames, dir / "cloud.stg4");
}

SceneArtifact load_artifact(const fs::path& dir) {
  const json doc = read_json_file(dir / "scene.json");
  SceneArtifact a;
  parse_guard("scene.json", [&] {
    a.scene_id = doc.at("scene_id").get<std::string>();
    a.manifest_path = doc.at("manifest").get<std::string>();
    a.rig = doc.at("rig").get<std::vector<std::string>>();
    for (const json& f : doc.at("frames")) {
      a.scene.ego_poses.push_back(transform_from_json(f.at("ego_pose")));
      a.scene.refined_poses.push_back(transform_from_json(f.at("refined_pose")));
      FramePointCloud cloud;
      cloud.frame_index = f.at("index").get<int>();
      cloud.timestamp = f.at("timestamp").get<double>();
      cloud.tag = FrameTag::World;
      a.scene.frames.push_back(std::move(cloud));
      auto& cams = a.cameras.emplace_back();
      for (const json& c : f.at("cameras")) {
        cams.push_back({c.at("name").get<std::string>(), intrinsics_from_json(c.at("intrinsics")),
                        transform_from_json(c.at("extrinsic")), c.value("image_path", ""),
                        c.value("depth_path", "")});
      }
    }
    return 0;
  });
  if (fs::exists(dir / "alignment_report.json")) {
    const json rep = read_json_file(dir / "alignment_report.json");
    parse_guard("alignment_report.json", [&] {
      for (const json& r : rep.at("frames")) {
        AlignmentReport out;
        out.errors = r.at("errors").get<std::vector<double>>();
        out.inlier_errors = r.value("inlier_errors", std::vector<double>{});
        out.correspondence_count = r.at("correspondence_count").get<std::vector<std::size_t>>();
        out.iterations = r.at("iterations").get<int>();
        out.converged = r.at("converged").get<bool>();
        out.fine_aligned = r.value("fine_aligned", false);
        out.failure = r.value("failure", "");
        a.scene.reports.push_back(std::move(out));
      }
      return 0;
    });
  }
  a.scene.reports.resize(a.scene.size());

  auto clouds = load_cloud(dir / doc.value("cloud", "cloud.stg4"));
  if (clouds.size() > a.scene.size()) {
    throw Error(ErrorKind::ValidationError, "cloud references frames beyond scene.json");
  }
  for (std::size_t f = 0; f < clouds.size(); ++f) a.scene.frames[f].points = std::move(clouds[f].points);
  return a;
}

std::vector<RemovalBox> removal_boxes_from_json(const json& j) {
  return parse_guard("removal boxes", [&] {
    std::vector<RemovalBox> out;
    const json& list = j.is_array() ? j : j.at("boxes");
    for (const json& b : list) {
      RemovalBox r;
      r.box = yaw_box_from_json(b);
      const auto range = b.at("frame_range").get<std::vector<int>>();
      if (range.size() != 2) throw Error(ErrorKind::ParseError, "frame_range must be [first, last]");
      r.first_frame = range[0];
      r.last_frame = range[1];
      r.validate();
      out.push_back(r);
    }
    return out;
  });
}

BuildResult cmd_build(const JobConfig& config) {
  config.validate();
  const SceneManifest manifest = load_manifest(config.manifest);

  std::vector<FramePointCloud> frames;
  std::vector<RigidTransform> poses;
  for (std::size_t f = 0; f < manifest.frames.size(); ++f) {
    frames.push_back(reconstruct_frame(manifest, f, config.stride));
    poses.push_back(manifest.frames[f].ego_pose);
    log::debug("frame " + std::to_string(f) + ": lifted " + std::to_string(frames.back().size()) + " points");
  }
  AlignmentConfig align = config.alignment;
  align.reference_voxel = config.voxel;

  SceneArtifact artifact;
  artifact.scene_id = manifest.scene_id;
  artifact.manifest_path = fs::absolute(config.manifest).lexically_normal();
  artifact.rig = manifest.rig;
  for (const auto& f : manifest.frames) artifact.cameras.push_back(f.cameras);
  artifact.scene = build_scene4d(frames, poses, align);

  std::size_t removed = 0;
  if (config.removal_boxes) {
    const auto boxes = removal_boxes_from_json(read_json_file(*config.removal_boxes));
    artifact.scene = remove_objects(artifact.scene, boxes, &removed);
  }

  save_artifact(artifact, config.output_dir);
  if (config.export_ply) export_ply(artifact.scene.frames, config.output_dir / "scene.ply");

  BuildResult result;
  json frames_summary = json::array();
  std::size_t converged = 0, total_points = 0;
  for (std::size_t f = 0; f < artifact.scene.size(); ++f) {
    const auto& r = artifact.scene.reports[f];
    converged += r.converged ? 1 : 0;
    total_points += artifact.scene.frames[f].size();
    if (!r.failure.empty()) result.alignment_failed = true;
    frames_summary.push_back({{"frame", f}, {"iterations", r.iterations}, {"converged", r.converged},
                              {"points", artifact.scene.frames[f].size()}});
  }
  result.summary = {{"command", "build"},
                    {"scene_id", artifact.scene_id},
                    {"frames", artifact.scene.size()},
                    {"points", total_points},
                    {"converged_frames", converged},
                    {"removed_points", removed},
                    {"alignment_failed", result.alignment_failed},
                    {"output", config.output_dir.string()},
                    {"per_frame", frames_summary}};
  return result;
}

json cmd_render(const fs::path& scene_dir, const fs::path& trajectory_path, const fs::path& out_dir) {
  const TrajectorySpec traj = trajectory_from_json(read_json_file(trajectory_path));
  const SceneArtifact a = load_artifact(scene_dir);
  if (traj.base_frame < 0 || traj.base_frame >= static_cast<int>(a.scene.size())) {
    throw Error(ErrorKind::InvalidTrajectory, "base_frame outside the scene");
  }
  const int cam = a.camera_index(traj.camera);
  const CameraIntrinsics k = traj.intrinsics.value_or(a.cameras.at(traj.base_frame).at(cam).intrinsics);
  const RigidTransform base = a.camera_pose(traj.base_frame, cam);
  for (const auto& s : traj.steps) {
    if (s.time && (*s.time < 0 || *s.time >= static_cast<int>(a.scene.size()))) {
      throw Error(ErrorKind::InvalidTrajectory, "step time " + std::to_string(*s.time) + " outside the scene");
    }
  }

  std::vector<KeyframeRender> renders;
  std::vector<RenderControl> controls;
  for (const auto& s : traj.steps) {
    RenderControl c;
    c.camera_pose = s.pose_delta ? base * *s.pose_delta : base;
    c.time_selector = {s.time.value_or(traj.base_frame)};
    c.intrinsics = k;
    c.splat_radius = traj.splat_radius;
    controls.push_back(c);
  }
  switch (traj.mode) {
    case TrajectoryMode::FrozenTime: {
      std::vector<RigidTransform> poses;
      for (const auto& c : controls) poses.push_back(c.camera_pose);
      renders = render_frozen_time(a.scene, traj.base_frame, poses, k, traj.splat_radius);
      break;
    }
    case TrajectoryMode::FrozenSpace: {
      std::vector<int> times;
      for (const auto& s : traj.steps) times.push_back(*s.time);
      renders = render_frozen_space(a.scene, base, times, k, traj.splat_radius);
      break;
    }
    case TrajectoryMode::Free:
      for (const auto& c : controls) renders.push_back(render_keyframe(a.scene, c));
      break;
  }

  ensure_dir(out_dir);
  json index = json::array();
  for (std::size_t i = 0; i < renders.size(); ++i) {
    char stem[32];
    std::snprintf(stem, sizeof stem, "%05zu", i);
    write_render(renders[i], out_dir, stem);
    index.push_back({{"seq", i},
                     {"stem", stem},
                     {"frames", controls[i].time_selector},
                     {"camera_pose", to_json(controls[i].camera_pose)},
                     {"occupied_pixels", renders[i].occupied_count()}});
  }
  const char* mode = traj.mode == TrajectoryMode::FrozenTime   ? "frozen_time"
                     : traj.mode == TrajectoryMode::FrozenSpace ? "frozen_space"
                                                                : "free";
  const json doc = {{"scene_id", a.scene_id}, {"mode", mode}, {"base_frame", traj.base_frame},
                    {"camera", traj.camera}, {"intrinsics", to_json(k)},
                    {"splat_radius", traj.splat_radius}, {"renders", index}};
  write_text_file(out_dir / "index.json", doc.dump(2) + "\n");
  return {{"command", "render"}, {"renders", renders.size()}, {"output", out_dir.string()}};
}

json cmd_export_pairs(const fs::path& scene_dir, const fs::path& out_dir, int splat_radius) {
  const SceneArtifact a = load_artifact(scene_dir);
  const SceneManifest manifest = load_manifest(a.manifest_path);
  const auto pairs = export_training_pairs(a.scene, manifest, splat_radius);
  ensure_dir(out_dir);
  write_training_pairs(pairs, manifest, out_dir);
  return {{"command", "export-pairs"}, {"pairs", pairs.size()}, {"output", out_dir.string()}};
}

json cmd_remove(const fs::path& scene_dir, const fs::path& boxes_path, const fs::path& out_dir) {
  const auto boxes = removal_boxes_from_json(read_json_file(boxes_path));
  SceneArtifact a = load_artifact(scene_dir);
  std::size_t flagged = 0;
  a.scene = remove_objects(a.scene, boxes, &flagged);
  log::info("removal flagged " + std::to_string(flagged) + " points in " +
            std::to_string(boxes.size()) + " box(es)");
  save_artifact(a, out_dir);
  return {{"command", "remove"}, {"boxes", boxes.size()}, {"flagged_points", flagged},
          {"output", out_dir.string()}};
}

json cmd_eval(const fs::path& render_dir, const fs::path& gt_dir, const fs::path& out_dir, bool masked) {
  const MetricReport report = evaluate_sequence(render_dir, gt_dir, masked);
  ensure_dir(out_dir);
  write_text_file(out_dir / "metrics.json", report.to_json().dump(2) + "\n");
  write_text_file(out_dir / "metrics.csv", report.to_csv(false));
  if (masked) write_text_file(out_dir / "metrics_masked.csv", report.to_csv(true));
  json summary = {{"command", "eval"}, {"images", report.per_image.size()},
                  {"psnr_db", report.mean_psnr}, {"ssim", report.mean_ssim}};
  if (report.mean_psnr_masked) summary["psnr_masked_db"] = *report.mean_psnr_masked;
  return summary;
}

json cmd_synth(const fs::path& config_path, const fs::path& out_dir) {
  const json cfg = read_json_file(config_path);
  const synth::SynthSpec spec = synth::spec_from_json(cfg);
  try {
    spec.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::ValidationError, std::string("synth spec: ") + e.what());
  }
  SceneManifest manifest = synth::generate(spec, out_dir);
  json summary = {{"command", "synth"}, {"frames", spec.frame_count}, {"cameras", spec.rig.size()},
                  {"output", out_dir.string()}};
  if (cfg.contains("perturb")) {
    const json& p = cfg.at("perturb");
    const auto perturbed = parse_guard("perturb", [&] {
      return synth::perturb_poses(manifest, p.value("rot_deg", 0.0), p.value("trans_m", 0.0),
                                  p.value("seed", std::uint64_t{0}));
    });
    save_manifest(perturbed.manifest, out_dir / "manifest.json");
    write_text_file(out_dir / "ground_truth.json",
                    synth::ground_truth_json(spec, perturbed.perturbations).dump(2) + "\n");
    summary["perturbed"] = true;
  }
  return summary;
}

int run(const std::vector<std::string>& args) {
  std::vector<char*> argv;
  std::vector<std::string> copy = args;
  for (auto& s : copy) argv.push_back(s.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

int run(int argc, char** argv) {
  CLI::App app{"drive4d: 4D driving-scene reconstruction and controllable keyframe rendering"};
  app.require_subcommand(1);
  unsigned threads = 0;
  bool verbose = false;
  app.add_option("--threads", threads, "Worker threads (0 = machine parallelism)");
  app.add_flag("--verbose", verbose, "Debug logging on stderr");

  std::string config, in_a, in_b, out;
  bool masked = false;
  int splat = 0;

  auto* build = app.add_subcommand("build", "Reconstruct and align a scene from a manifest");
  build->add_option("--config", config, "Job config (JSON)");
  build->add_option("manifest", in_a, "Scene manifest (overrides config)");
  build->add_option("out_dir", out, "Output directory (overrides config)");

  auto* render = app.add_subcommand("render", "Render a trajectory through a built scene");
  render->add_option("--config", config, "Trajectory spec (JSON)")->required();
  render->add_option("scene_dir", in_a, "Built scene directory")->required();
  render->add_option("out_dir", out, "Output directory")->required();

  auto* pairs = app.add_subcommand("export-pairs", "Export even/odd training pairs");
  pairs->add_option("--config", config, "Optional options (JSON: splat_radius)");
  pairs->add_option("--splat-radius", splat, "Splat radius in pixels");
  pairs->add_option("scene_dir", in_a, "Built scene directory")->required();
  pairs->add_option("out_dir", out, "Output directory")->required();

  auto* remove = app.add_subcommand("remove", "Soft-delete points inside boxes");
  remove->add_option("--config", config, "Removal boxes (JSON)")->required();
  remove->add_option("scene_dir", in_a, "Built scene directory")->required();
  remove->add_option("out_dir", out, "Output scene directory")->required();

  auto* eval = app.add_subcommand("eval", "PSNR/SSIM between render and ground-truth dirs");
  eval->add_option("--config", config, "Optional options (JSON: masked)");
  eval->add_flag("--masked", masked, "Restrict PSNR to occupancy pixels (reported alongside)");
  eval->add_option("render_dir", in_a, "Render directory")->required();
  eval->add_option("gt_dir", in_b, "Ground-truth directory")->required();
  eval->add_option("out_dir", out, "Report directory")->required();

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic oracle scene");
  synth_cmd->add_option("--config", config, "Synthetic scene spec (JSON)")->required();
  synth_cmd->add_option("out_dir", out, "Output directory")->required();

  for (auto* sub : {build, render, pairs, remove, eval, synth_cmd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  set_thread_count(threads);
  log::set_verbose(verbose);
  try {
    json summary;
    int code = kExitOk;
    if (build->parsed()) {
      JobConfig job;
      if (!config.empty()) job = job_config_from_json(read_json_file(config));
      if (!in_a.empty()) job.manifest = in_a;
      if (!out.empty()) job.output_dir = out;
      BuildResult r = cmd_build(job);
      summary = r.summary;
      if (r.alignment_failed) code = kExitProcessing;
    } else if (render->parsed()) {
      summary = cmd_render(in_a, config, out);
    } else if (pairs->parsed()) {
      if (!config.empty()) splat = read_json_file(config).value("splat_radius", splat);
      summary = cmd_export_pairs(in_a, out, splat);
    } else if (remove->parsed()) {
      summary = cmd_remove(in_a, config, out);
    } else if (eval->parsed()) {
      if (!config.empty()) masked = masked || read_json_file(config).value("masked", false);
      summary = cmd_eval(in_a, in_b, out, masked);
    } else if (synth_cmd->parsed()) {
      summary = cmd_synth(config, out);
    }
    std::cout << summary.dump() << std::endl;
    return code;
  } catch (const Error& e) {
    log::warn(std::string("error: ") + e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    log::warn(std::string("error: ") + e.what());
    return kExitProcessing;
  }
}

}  // namespace drive4d::cli
