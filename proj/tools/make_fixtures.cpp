// Writes the bundled synthetic datasets:
//   rgb96.png      96x96 RGB, piecewise-smooth shapes over a shaded background
//   cube32.mbf     32x32x8 multiband cube, three endmember spectra mixed by smooth abundances
//   surface2k.csv  2000 points on a colored surface, columns x,y,z,R,G,B,id
//   weather64.mbf  64x64x5 grid: prcp, tmax, tmin, srad, vp
// Usage: sinr_fixtures [output-dir]   (default: data)

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#include "sinr/io.hpp"
#include "sinr/random.hpp"

namespace {

namespace fs = std::filesystem;
using sinr::GridShape;
using sinr::Matrix;
constexpr double kPi = std::numbers::pi;

double clamp01(double v) { return std::fmin(1.0, std::fmax(0.0, v)); }

double smoothstep(double edge, double width, double d) {
  const double t = clamp01((d - edge) / width + 0.5);
  return t * t * (3.0 - 2.0 * t);
}

Matrix rgb_image(std::size_t h, std::size_t w) {
  Matrix img(3, h * w);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const double u = (x + 0.5) / w;
      const double v = (y + 0.5) / h;
      // sky-like vertical gradient
      double r = 0.35 + 0.35 * v;
      double g = 0.55 + 0.2 * v;
      double b = 0.85 - 0.3 * v;
      // ground band with a gentle ripple
      const double horizon = 0.62 + 0.05 * std::sin(2.0 * kPi * u * 1.5);
      const double ground = 1.0 - smoothstep(horizon, 0.02, v);
      r = r * ground + (0.45 + 0.15 * u) * (1.0 - ground);
      g = g * ground + (0.35 + 0.1 * std::cos(3.0 * kPi * u)) * (1.0 - ground);
      b = b * ground + 0.18 * (1.0 - ground);
      // shaded disk
      const double dx = u - 0.3, dy = v - 0.32;
      const double disk = 1.0 - smoothstep(0.16, 0.015, std::sqrt(dx * dx + dy * dy));
      const double shade = 0.75 + 0.25 * (-dx - dy) / 0.16;
      r = r * (1.0 - disk) + 0.95 * shade * disk;
      g = g * (1.0 - disk) + 0.78 * shade * disk;
      b = b * (1.0 - disk) + 0.2 * shade * disk;
      // rectangle with a horizontal stripe pattern
      const double rect = (1.0 - smoothstep(0.5, 0.012, std::abs(u - 0.7) / 0.18 * 0.5)) *
                          (1.0 - smoothstep(0.5, 0.012, std::abs(v - 0.55) / 0.3 * 0.5));
      const double stripe = 0.5 + 0.5 * std::sin(2.0 * kPi * v * 6.0);
      r = r * (1.0 - rect) + (0.25 + 0.5 * stripe) * rect;
      g = g * (1.0 - rect) + 0.15 * rect;
      b = b * (1.0 - rect) + (0.55 - 0.25 * stripe) * rect;
      const std::size_t i = y * w + x;
      img(0, i) = clamp01(r);
      img(1, i) = clamp01(g);
      img(2, i) = clamp01(b);
    }
  return img;
}

Matrix multiband_cube(std::size_t h, std::size_t w, std::size_t bands) {
  Matrix cube(bands, h * w);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const double u = (x + 0.5) / w, v = (y + 0.5) / h;
      double a[3] = {1.0 + std::sin(2 * kPi * u), 1.0 + std::cos(2 * kPi * v),
                     0.5 + ((u - 0.6) * (u - 0.6) + (v - 0.4) * (v - 0.4) < 0.04 ? 2.0 : 0.0)};
      const double total = a[0] + a[1] + a[2];
      for (double& ai : a) ai /= total;
      for (std::size_t b = 0; b < bands; ++b) {
        const double lambda = static_cast<double>(b) / (bands - 1);
        const double e0 = 0.2 + 0.6 * lambda;
        const double e1 = 0.8 * std::exp(-8.0 * (lambda - 0.3) * (lambda - 0.3));
        const double e2 = 0.5 + 0.4 * std::sin(kPi * lambda);
        cube(b, y * w + x) = a[0] * e0 + a[1] * e1 + a[2] * e2;
      }
    }
  return cube;
}

void write_surface_csv(const fs::path& path, std::size_t n, std::uint64_t seed) {
  sinr::Rng rng(seed);
  std::ofstream out(path);
  out << "# coords=x,y,z values=R,G,B\n";
  out << "x,y,z,R,G,B,id\n";
  char line[256];
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.uniform(-1.0, 1.0);
    const double y = rng.uniform(-1.0, 1.0);
    const double z = 0.5 * std::sin(kPi * x) * std::cos(kPi * y);
    const double r = clamp01(0.5 + 0.5 * z + 0.2 * x);
    const double g = clamp01(0.5 + 0.4 * std::sin(2.0 * kPi * y));
    const double b = clamp01(x * x + y * y < 0.25 ? 0.9 : 0.3 + 0.2 * y);
    std::snprintf(line, sizeof line, "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%zu\n", x, y, z, r, g, b, i);
    out << line;
  }
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

Matrix weather_grid(std::size_t h, std::size_t w) {
  Matrix grid(5, h * w);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const double u = (x + 0.5) / w, v = (y + 0.5) / h;
      const double elevation = std::exp(-((u - 0.7) * (u - 0.7) + (v - 0.3) * (v - 0.3)) / 0.03);
      const double front = 1.0 / (1.0 + std::exp(-(u + 0.6 * v - 0.8) * 25.0));
      const double prcp = 2.0 + 8.0 * front * (0.6 + 0.4 * std::sin(6.0 * v)) + 4.0 * elevation;
      const double tmax = 24.0 - 10.0 * v - 12.0 * elevation + 2.0 * std::cos(3.0 * u);
      const double tmin = tmax - 9.0 - 3.0 * front;
      const double srad = 320.0 - 120.0 * front + 30.0 * u;
      const double vp = 600.0 + 400.0 * std::exp(0.06 * tmin) - 200.0 * elevation;
      const std::size_t i = y * w + x;
      grid(0, i) = prcp;
      grid(1, i) = tmax;
      grid(2, i) = tmin;
      grid(3, i) = srad;
      grid(4, i) = vp;
    }
  return grid;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path dir = argc > 1 ? argv[1] : "data";
  try {
    fs::create_directories(dir);
    sinr::save_png(rgb_image(96, 96), GridShape{96, 96}, dir / "rgb96.png");
    sinr::save_mbf(multiband_cube(32, 32, 8), GridShape{32, 32}, dir / "cube32.mbf");
    write_surface_csv(dir / "surface2k.csv", 2000, 2024);
    sinr::save_mbf(weather_grid(64, 64), GridShape{64, 64}, dir / "weather64.mbf");
  } catch (const std::exception& e) {
    std::cerr << "sinr_fixtures: " << e.what() << '\n';
    return 1;
  }
  std::cout << "wrote fixtures to " << dir.string() << '\n';
  return 0;
}
