#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "drive4d/synth.hpp"

namespace testsupport {

namespace fs = std::filesystem;
constexpr double kPi = 3.14159265358979323846;

inline double deg(double d) { return d * kPi / 180.0; }
inline double to_deg(double r) { return r * 180.0 / kPi; }

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = fs::temp_directory_path() /
            ("drive4d_" + tag + "_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

inline drive4d::synth::SynthObject box(const drive4d::Vec3& center, const drive4d::Vec3& half,
                                       drive4d::Rgb color) {
  drive4d::synth::SynthObject o;
  o.center = center;
  o.half_extents = half;
  o.color = color;
  return o;
}

// Walled courtyard with scattered low blocks: every rigid degree of freedom is
// observed by some face, and the whole floor is sampled more densely than the
// alignment voxel.
inline drive4d::synth::SynthSpec courtyard_spec(int frames, int width = 200) {
  using drive4d::Vec3;
  drive4d::synth::SynthSpec s;
  s.scene_id = "courtyard";
  s.frame_count = frames;
  s.frame_dt = 1.0;
  s.rig = drive4d::synth::surround_rig(width, width * 3 / 4, 70.0, 10.0);
  s.ego.speed = 0.1;
  s.ego.yaw_rate = 0.005;
  const double l = 12.0;
  s.objects.push_back(box({l, 0, 2}, {0.5, l, 2}, {200, 80, 80}));
  s.objects.push_back(box({-l, 0, 2.5}, {0.5, l, 2.5}, {80, 200, 80}));
  s.objects.push_back(box({0, l, 1.5}, {l, 0.5, 1.5}, {80, 80, 200}));
  s.objects.push_back(box({0, -l, 3}, {l, 0.5, 3}, {200, 200, 80}));
  std::mt19937_64 rng(5);
  auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
  for (int placed = 0; placed < 60;) {
    const double x = u() * (l - 1.5), y = u() * (l - 1.5);
    if (std::hypot(x, y) < 3.0) continue;
    const double hz = 0.3 + 0.5 * (u() + 1.0);
    const double hx = 0.3 + 0.25 * (u() + 1.0), hy = 0.3 + 0.25 * (u() + 1.0);
    const auto r = static_cast<std::uint8_t>(100 + 50 * (u() + 1.0));
    const auto b = static_cast<std::uint8_t>(100 + 50 * (u() + 1.0));
    s.objects.push_back(box({x, y, hz}, {hx, hy, hz}, {r, 90, b}));
    ++placed;
  }
  return s;
}

}  // namespace testsupport
