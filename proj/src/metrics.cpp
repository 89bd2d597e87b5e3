#include "sinr/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "sinr/errors.hpp"

namespace sinr {

namespace {

void require_same_shape(const char* name, const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(name) + ": shapes " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " and " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()) + " differ");
  }
  if (a.empty()) throw InvalidArgument(std::string(name) + ": empty input");
}

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

std::array<double, kWindow> gaussian_taps() {
  std::array<double, kWindow> taps{};
  double total = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    taps[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    total += taps[i];
  }
  for (double& t : taps) t /= total;
  return taps;
}

// Separable "valid" Gaussian filter of an h x w plane.
std::vector<double> filter_valid(const std::vector<double>& img, std::size_t h, std::size_t w,
                                 const std::array<double, kWindow>& taps) {
  const std::size_t oh = h - kWindow + 1;
  const std::size_t ow = w - kWindow + 1;
  std::vector<double> horiz(h * ow);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int t = 0; t < kWindow; ++t) acc += taps[t] * img[y * w + x + t];
      horiz[y * ow + x] = acc;
    }
  std::vector<double> out(oh * ow);
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int t = 0; t < kWindow; ++t) acc += taps[t] * horiz[(y + t) * ow + x];
      out[y * ow + x] = acc;
    }
  return out;
}

}  // namespace

double psnr(const Matrix& a, const Matrix& b) {
  require_same_shape("psnr", a, b);
  double total = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto ar = a.row(r);
    auto br = b.row(r);
    double sse = 0.0;
    for (std::size_t c = 0; c < ar.size(); ++c) {
      const double d = ar[c] - br[c];
      sse += d * d;
    }
    if (sse == 0.0) return std::numeric_limits<double>::infinity();
    total += 10.0 * std::log10(static_cast<double>(ar.size()) / sse);
  }
  return total / static_cast<double>(a.rows());
}

double ssim(const Matrix& a, const Matrix& b, GridShape grid) {
  require_same_shape("ssim", a, b);
  const std::size_t h = grid.height;
  const std::size_t w = grid.width;
  if (h * w != a.cols()) throw DimensionError("ssim: grid does not match the number of pixels");
  if (h < kWindow || w < kWindow) {
    throw InvalidArgument("ssim: image " + std::to_string(h) + "x" + std::to_string(w) +
                          " is smaller than the 11x11 window");
  }
  const auto taps = gaussian_taps();
  const std::size_t n = h * w;
  double total = 0.0;
  for (std::size_t band = 0; band < a.rows(); ++band) {
    std::vector<double> x(a.row(band).begin(), a.row(band).end());
    std::vector<double> y(b.row(band).begin(), b.row(band).end());
    std::vector<double> xx(n), yy(n), xy(n);
    for (std::size_t i = 0; i < n; ++i) {
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const auto mu_x = filter_valid(x, h, w, taps);
    const auto mu_y = filter_valid(y, h, w, taps);
    const auto e_xx = filter_valid(xx, h, w, taps);
    const auto e_yy = filter_valid(yy, h, w, taps);
    const auto e_xy = filter_valid(xy, h, w, taps);
    double band_sum = 0.0;
    for (std::size_t i = 0; i < mu_x.size(); ++i) {
      const double mx = mu_x[i];
      const double my = mu_y[i];
      const double vx = e_xx[i] - mx * mx;
      const double vy = e_yy[i] - my * my;
      const double cxy = e_xy[i] - mx * my;
      band_sum += ((2.0 * mx * my + kC1) * (2.0 * cxy + kC2)) /
                  ((mx * mx + my * my + kC1) * (vx + vy + kC2));
    }
    total += band_sum / static_cast<double>(mu_x.size());
  }
  return total / static_cast<double>(a.rows());
}

double nrmse(const Matrix& pred, const Matrix& truth) {
  require_same_shape("nrmse", pred, truth);
  double total = 0.0;
  for (std::size_t r = 0; r < truth.rows(); ++r) {
    auto t = truth.row(r);
    auto p = pred.row(r);
    const auto [lo, hi] = std::minmax_element(t.begin(), t.end());
    const double range = *hi - *lo;
    if (!(range > 0.0)) {
      throw InvalidArgument("nrmse: truth row " + std::to_string(r) + " has zero range");
    }
    double sse = 0.0;
    for (std::size_t c = 0; c < t.size(); ++c) {
      const double d = p[c] - t[c];
      sse += d * d;
    }
    total += std::sqrt(sse / static_cast<double>(t.size())) / range;
  }
  return total / static_cast<double>(truth.rows());
}

double r_square(const Matrix& pred, const Matrix& truth) {
  require_same_shape("r_square", pred, truth);
  auto t = truth.data();
  auto p = pred.data();
  double mean = 0.0;
  for (double v : t) mean += v;
  mean /= static_cast<double>(t.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    ss_res += (t[i] - p[i]) * (t[i] - p[i]);
    ss_tot += (t[i] - mean) * (t[i] - mean);
  }
  const bool constant = std::all_of(t.begin(), t.end(), [&](double v) { return v == t[0]; });
  if (constant || !(ss_tot > 0.0)) throw InvalidArgument("r_square: truth is constant");
  return 1.0 - ss_res / ss_tot;
}

MetricReport evaluate_metrics(const Matrix& pred, const Matrix& truth,
                              std::optional<GridShape> grid) {
  MetricReport report;
  report.psnr = psnr(pred, truth);
  if (grid && grid->height >= kWindow && grid->width >= kWindow) {
    report.ssim = ssim(pred, truth, *grid);
  }
  try {
    report.nrmse = nrmse(pred, truth);
  } catch (const InvalidArgument&) {
  }
  try {
    report.r_square = r_square(pred, truth);
  } catch (const InvalidArgument&) {
  }
  return report;
}

}  // namespace sinr
