#include <doctest.h>

#include <cmath>
#include <random>

#include "drive4d/error.hpp"
#include "drive4d/evaluation.hpp"
#include "drive4d/scene_io.hpp"
#include "support.hpp"

using namespace drive4d;
using testsupport::TempDir;

namespace {

ColorImage pattern(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(0, 255);
  ColorImage img(w, h);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(d(rng));
  return img;
}

ColorImage stripes(int w, int h) {
  ColorImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const auto v = static_cast<std::uint8_t>(((x / 4 + y / 8) % 2) ? 230 : 20);
      img.set(x, y, {v, static_cast<std::uint8_t>(x * 3), static_cast<std::uint8_t>(255 - y * 2)});
    }
  return img;
}

ColorImage negative(const ColorImage& a) {
  ColorImage n = a;
  for (auto& v : n.data) v = static_cast<std::uint8_t>(255 - v);
  return n;
}

ColorImage plus_noise(const ColorImage& a, int amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ColorImage out = a;
  for (auto& v : out.data) {
    const double noisy = v + amplitude * u(rng);
    v = static_cast<std::uint8_t>(std::clamp(std::lround(noisy), 0L, 255L));
  }
  return out;
}

// Direct windowed SSIM; weights renormalized from exp(-r^2 / 2 sigma^2).
double reference_ssim(const ColorImage& a, const ColorImage& b) {
  double g[11][11], sum = 0.0;
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 11; ++j) sum += g[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / 4.5);
  const double c1 = std::pow(0.01 * 255, 2), c2 = std::pow(0.03 * 255, 2);
  double total = 0.0;
  int windows = 0;
  for (int ch = 0; ch < 3; ++ch)
    for (int y = 0; y + 11 <= a.height; ++y)
      for (int x = 0; x + 11 <= a.width; ++x) {
        double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
        for (int i = 0; i < 11; ++i)
          for (int j = 0; j < 11; ++j) {
            const double w = g[i][j] / sum;
            const double va = a.at(x + j, y + i)[ch], vb = b.at(x + j, y + i)[ch];
            ma += w * va;
            mb += w * vb;
            saa += w * va * va;
            sbb += w * vb * vb;
            sab += w * va * vb;
          }
        const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
        total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        ++windows;
      }
  return total / windows;
}

}  // namespace

TEST_CASE("psnr: cap, analytic +1, masks") {
  const ColorImage a = pattern(32, 24, 1);
  CHECK(psnr(a, a) == kPsnrCap);
  ColorImage flat(32, 24), up(32, 24);
  for (auto& v : flat.data) v = 100;
  for (auto& v : up.data) v = 101;
  CHECK(psnr(flat, up) == doctest::Approx(20.0 * std::log10(255.0)).epsilon(1e-12));
  CHECK(std::abs(psnr(flat, up) - 48.13) <= 0.01);

  GrayImage empty(32, 24);
  try {
    psnr(a, a, &empty);
    FAIL("expected EmptyMask");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyMask);
  }
  GrayImage wrong(4, 4);
  CHECK_THROWS_AS(psnr(a, a, &wrong), Error);
  CHECK_THROWS_AS(psnr(a, pattern(31, 24, 1)), Error);

  // Differences outside the mask do not count.
  GrayImage half(32, 24);
  ColorImage b = flat;
  for (int y = 0; y < 24; ++y)
    for (int x = 0; x < 32; ++x) {
      if (x < 16) half.data[y * 32 + x] = 255;
      else b.set(x, y, {0, 0, 0});
    }
  CHECK(psnr(flat, b, &half) == kPsnrCap);
  CHECK(psnr(flat, b) < 20.0);
}

TEST_CASE("psnr is symmetric and monotone in noise amplitude") {
  const ColorImage a = pattern(40, 30, 2);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const ColorImage b = pattern(40, 30, 100 + s);
    CHECK(psnr(a, b) == psnr(b, a));
  }
  const ColorImage mid = stripes(40, 30);
  double last = kPsnrCap;
  for (int amp : {0, 1, 2, 4, 8, 16, 32, 64}) {
    const double p = psnr(mid, plus_noise(mid, amp, 9));
    CHECK(p <= last);
    last = p;
  }
}

TEST_CASE("ssim: identity, negative, bounds, reference windowing") {
  const ColorImage s = stripes(64, 64);
  CHECK(std::abs(ssim(s, s) - 1.0) <= 1e-9);
  CHECK(ssim(s, negative(s)) < 0.2);
  try {
    ssim(ColorImage(8, 8), ColorImage(8, 8));
    FAIL("expected TooSmall");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TooSmall);
  }
  CHECK_THROWS_AS(ssim(ColorImage(20, 20), ColorImage(20, 21)), Error);

  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const ColorImage a = pattern(19, 15, seed);
    const ColorImage b = plus_noise(a, static_cast<int>(seed * 20), seed + 50);
    const double v = ssim(a, b);
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
    CHECK(v == doctest::Approx(reference_ssim(a, b)).epsilon(1e-9));
    CHECK(std::abs(ssim(a, a) - 1.0) <= 1e-9);
  }
  const ColorImage p = pattern(11, 11, 3);
  CHECK(ssim(p, negative(p)) == doctest::Approx(reference_ssim(p, negative(p))).epsilon(1e-9));
}

TEST_CASE("evaluate_sequence: identity, pairing, aggregate mean") {
  TempDir dir("eval");
  const auto renders = dir / "renders", truth = dir / "gt";
  std::filesystem::create_directories(renders);
  std::filesystem::create_directories(truth);
  ColorImage base(24, 24);
  for (auto& v : base.data) v = 120;
  std::vector<double> expected;
  for (int i = 0; i < 3; ++i) {
    const std::string stem = "0000" + std::to_string(i);
    ColorImage r = base;
    for (int k = 0; k <= i; ++k) r.data[k * 7] = static_cast<std::uint8_t>(120 + 10 * (i + 1));
    write_png(truth / (stem + ".png"), base);
    write_png(renders / (stem + "_color.png"), r);
    GrayImage occ(24, 24);
    occ.data.assign(occ.data.size(), 255);
    write_png(renders / (stem + "_occ.png"), occ);
    // Hand value: (i+1) samples off by 10(i+1) among 24*24*3.
    const double mse = (i + 1) * std::pow(10.0 * (i + 1), 2) / (24.0 * 24 * 3);
    expected.push_back(10.0 * std::log10(255.0 * 255.0 / mse));
  }
  const auto report = evaluate_sequence(renders, truth, true);
  REQUIRE(report.per_image.size() == 3);
  CHECK(report.per_image[0].name == "00000");
  for (int i = 0; i < 3; ++i) CHECK(report.per_image[i].psnr == doctest::Approx(expected[i]).epsilon(1e-12));
  CHECK(report.mean_psnr == doctest::Approx((expected[0] + expected[1] + expected[2]) / 3).epsilon(1e-12));
  REQUIRE(report.mean_psnr_masked.has_value());
  CHECK(*report.mean_psnr_masked == doctest::Approx(report.mean_psnr).epsilon(1e-12));
  const auto j = report.to_json();
  CHECK(j["images"].size() == 3);
  CHECK(j["aggregate"]["lpips"].is_null());
  CHECK(report.to_csv().rfind("name,psnr_db,ssim\n", 0) == 0);

  const auto same = evaluate_sequence(truth, truth, false);
  CHECK(same.mean_psnr == kPsnrCap);
  CHECK(std::abs(same.mean_ssim - 1.0) <= 1e-9);

  write_png(truth / "00009.png", base);
  try {
    evaluate_sequence(renders, truth, false);
    FAIL("expected MissingCounterpart");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingCounterpart);
    CHECK(std::string(e.what()).find("00009") != std::string::npos);
  }
}
