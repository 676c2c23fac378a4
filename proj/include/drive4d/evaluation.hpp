#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "drive4d/image.hpp"

namespace drive4d {

inline constexpr double kPsnrCap = 99.0;

// 10*log10(255^2 / MSE) with the MSE averaged over channels and (masked)
// pixels; kPsnrCap when MSE is 0. DimensionMismatch, EmptyMask.
double psnr(const ColorImage& a, const ColorImage& b, const GrayImage* mask = nullptr);

// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
// L = 255, evaluated at every fully contained window position and averaged,
// then averaged over channels. DimensionMismatch, TooSmall (min side < 11).
double ssim(const ColorImage& a, const ColorImage& b);

struct ImageMetrics {
  std::string name;
  double psnr = 0.0;
  double ssim = 0.0;
  std::optional<double> psnr_masked;  // only in masked mode; empty for empty masks
};

struct MetricReport {
  std::vector<ImageMetrics> per_image;  // ordered by name
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  std::optional<double> mean_psnr_masked;
  bool masked = false;

  nlohmann::json to_json() const;
  // Header "name,psnr_db,ssim"; psnr_db holds unmasked (or masked) values.
  std::string to_csv(bool masked_values = false) const;
};

// Pairs images by stem. A stem is the file name minus ".png", with a trailing
// "_color" dropped; "_depth" and "_occ" files are auxiliary. Masked mode reads
// each render's "{stem}_occ.png". MissingCounterpart names an unpaired stem.
MetricReport evaluate_sequence(const std::filesystem::path& render_dir,
                               const std::filesystem::path& gt_dir, bool masked);

}  // namespace drive4d
