#include "drive4d/evaluation.hpp"

#include <array>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "drive4d/error.hpp"
#include "drive4d/log.hpp"

namespace drive4d {

namespace {

void require_same_size(const ColorImage& a, const ColorImage& b) {
  if (a.width != b.width || a.height != b.height) {
    throw Error(ErrorKind::DimensionMismatch, "images differ in size");
  }
}

constexpr int kWindow = 11;

std::array<double, kWindow> gaussian_taps() {
  std::array<double, kWindow> g{};
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double x = i - kWindow / 2;
    g[i] = std::exp(-(x * x) / (2.0 * 1.5 * 1.5));
    sum += g[i];
  }
  for (auto& v : g) v /= sum;
  return g;
}

// Valid-mode separable filter of a w x h plane.
std::vector<double> filter_valid(const std::vector<double>& plane, int w, int h,
                                 const std::array<double, kWindow>& g) {
  const int ow = w - kWindow + 1, oh = h - kWindow + 1;
  std::vector<double> rows(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < kWindow; ++i) s += g[i] * plane[static_cast<std::size_t>(y) * w + x + i];
      rows[static_cast<std::size_t>(y) * ow + x] = s;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < kWindow; ++i) s += g[i] * rows[static_cast<std::size_t>(y + i) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = s;
    }
  }
  return out;
}

}  // namespace

double psnr(const ColorImage& a, const ColorImage& b, const GrayImage* mask) {
  require_same_size(a, b);
  if (mask && (mask->width != a.width || mask->height != a.height)) {
    throw Error(ErrorKind::DimensionMismatch, "mask differs in size from the images");
  }
  const std::size_t n = static_cast<std::size_t>(a.width) * a.height;
  // Integer accumulation keeps psnr(a, b) == psnr(b, a) bit for bit.
  std::uint64_t sse = 0, count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (mask && mask->data[i] == 0) continue;
    ++count;
    for (int c = 0; c < 3; ++c) {
      const int d = int(a.data[3 * i + c]) - int(b.data[3 * i + c]);
      sse += static_cast<std::uint64_t>(d * d);
    }
  }
  if (count == 0) {
    throw Error(mask ? ErrorKind::EmptyMask : ErrorKind::TooSmall,
                mask ? "mask selects no pixels" : "images are empty");
  }
  if (sse == 0) return kPsnrCap;
  const double mse = static_cast<double>(sse) / static_cast<double>(3 * count);
  return std::min(kPsnrCap, 10.0 * std::log10(255.0 * 255.0 / mse));
}

double ssim(const ColorImage& a, const ColorImage& b) {
  require_same_size(a, b);
  if (a.width < kWindow || a.height < kWindow) {
    throw Error(ErrorKind::TooSmall, "SSIM needs images of at least 11x11");
  }
  const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
  const double c2 = (0.03 * 255.0) * (0.03 * 255.0);
  const auto g = gaussian_taps();
  const int w = a.width, h = a.height;
  const std::size_t n = static_cast<std::size_t>(w) * h;

  double total = 0.0;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = a.data[3 * i + c];
      y[i] = b.data[3 * i + c];
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const auto mx = filter_valid(x, w, h, g), my = filter_valid(y, w, h, g);
    const auto sxx = filter_valid(xx, w, h, g), syy = filter_valid(yy, w, h, g);
    const auto sxy = filter_valid(xy, w, h, g);
    double sum = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double vx = sxx[i] - mx[i] * mx[i];
      const double vy = syy[i] - my[i] * my[i];
      const double cov = sxy[i] - mx[i] * my[i];
      sum += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
    }
    total += sum / static_cast<double>(mx.size());
  }
  return total / 3.0;
}

nlohmann::json MetricReport::to_json() const {
  nlohmann::json images = nlohmann::json::array();
  for (const auto& m : per_image) {
    nlohmann::json e = {{"name", m.name}, {"psnr_db", m.psnr}, {"ssim", m.ssim}};
    if (masked) e["psnr_masked_db"] = m.psnr_masked ? nlohmann::json(*m.psnr_masked) : nlohmann::json();
    // Perceptual metrics need pretrained networks; external tools may fill these.
    e["lpips"] = nullptr;
    images.push_back(e);
  }
  nlohmann::json agg = {{"psnr_db", mean_psnr}, {"ssim", mean_ssim}, {"lpips", nullptr},
                        {"fid", nullptr}, {"fvd", nullptr}};
  if (masked) agg["psnr_masked_db"] = mean_psnr_masked ? nlohmann::json(*mean_psnr_masked) : nlohmann::json();
  return {{"masked", masked}, {"images", images}, {"aggregate", agg}};
}

std::string MetricReport::to_csv(bool masked_values) const {
  std::ostringstream os;
  os.precision(10);
  os << "name,psnr_db,ssim\n";
  for (const auto& m : per_image) {
    os << m.name << ',';
    if (masked_values) {
      if (m.psnr_masked) os << *m.psnr_masked;
    } else {
      os << m.psnr;
    }
    os << ',' << m.ssim << '\n';
  }
  return os.str();
}

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// stem -> image file
std::map<std::string, std::filesystem::path> list_stems(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorKind::IoError, dir.string() + " is not a directory");
  }
  std::map<std::string, std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".png") continue;
    std::string stem = entry.path().stem().string();
    if (ends_with(stem, "_depth") || ends_with(stem, "_occ")) continue;
    if (ends_with(stem, "_color")) stem.resize(stem.size() - 6);
    out[stem] = entry.path();
  }
  return out;
}

}  // namespace

MetricReport evaluate_sequence(const std::filesystem::path& render_dir,
                               const std::filesystem::path& gt_dir, bool masked) {
  const auto renders = list_stems(render_dir);
  const auto truths = list_stems(gt_dir);
  for (const auto& [stem, _] : renders) {
    if (!truths.count(stem)) throw Error(ErrorKind::MissingCounterpart, "no ground truth for '" + stem + "'");
  }
  for (const auto& [stem, _] : truths) {
    if (!renders.count(stem)) throw Error(ErrorKind::MissingCounterpart, "no render for '" + stem + "'");
  }

  MetricReport report;
  report.masked = masked;
  double masked_sum = 0.0;
  std::size_t masked_n = 0;
  for (const auto& [stem, path] : renders) {
    const ColorImage r = read_color_png(path);
    const ColorImage g = read_color_png(truths.at(stem));
    ImageMetrics m;
    m.name = stem;
    m.psnr = psnr(r, g);
    m.ssim = ssim(r, g);
    if (masked) {
      const auto occ_path = render_dir / (stem + "_occ.png");
      if (!std::filesystem::exists(occ_path)) {
        throw Error(ErrorKind::MissingCounterpart, "no occupancy mask for '" + stem + "'");
      }
      const GrayImage mask = read_gray_png(occ_path);
      try {
        m.psnr_masked = psnr(r, g, &mask);
        masked_sum += *m.psnr_masked;
        ++masked_n;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::EmptyMask) throw;
        log::warn("'" + stem + "': empty occupancy, masked PSNR omitted");
      }
    }
    report.per_image.push_back(std::move(m));
  }
  if (!report.per_image.empty()) {
    double ps = 0.0, ss = 0.0;
    for (const auto& m : report.per_image) {
      ps += m.psnr;
      ss += m.ssim;
    }
    report.mean_psnr = ps / static_cast<double>(report.per_image.size());
    report.mean_ssim = ss / static_cast<double>(report.per_image.size());
  }
  if (masked_n > 0) report.mean_psnr_masked = masked_sum / static_cast<double>(masked_n);
  return report;
}

}  // namespace drive4d
