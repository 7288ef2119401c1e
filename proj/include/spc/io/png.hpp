#pragma once

// Heatmap export through libpng. Values are row-major, first row at the top.
// Colormap "inferno-5": piecewise-linear through five inferno stops,
//   0.00 (0, 0, 4)   0.25 (87, 16, 110)   0.50 (188, 55, 84)
//   0.75 (249, 142, 9)   1.00 (252, 255, 164),
// applied to (v - lo) / (hi - lo) clamped to [0, 1]; NaN pixels are gray.
// No time or text chunks are written, so equal inputs give equal files.

#include <spc/core.hpp>
#include <spc/currents/measure.hpp>
#include <spc/geom.hpp>

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace spc::io {

struct Heatmap {
  int width = 0, height = 0;
  std::vector<double> values;  // width * height, row-major, top row first

  double& at(int row, int col) { return values[std::size_t(row) * width + col]; }
};

inline std::array<unsigned char, 3> inferno5(double t) {
  static constexpr double stops[5][3] = {{0, 0, 4}, {87, 16, 110}, {188, 55, 84}, {249, 142, 9}, {252, 255, 164}};
  t = std::clamp(t, 0.0, 1.0) * 4;
  const int i = std::min(3, int(t));
  const double f = t - i;
  std::array<unsigned char, 3> rgb;
  for (int c = 0; c < 3; ++c) rgb[c] = static_cast<unsigned char>(std::lround(stops[i][c] + f * (stops[i + 1][c] - stops[i][c])));
  return rgb;
}

/// lo == hi means "use the finite min and max of the values".
inline void write_png(const std::string& path, const Heatmap& h, double lo = 0, double hi = 0) {
  if (h.width <= 0 || h.height <= 0 || h.values.size() != std::size_t(h.width) * h.height)
    throw DomainError("heatmap size mismatch");
  if (lo == hi) {
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (double v : h.values)
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    if (!(hi > lo)) hi = lo + 1;
  }
  std::vector<unsigned char> rgb(std::size_t(h.width) * h.height * 3);
  for (std::size_t i = 0; i < h.values.size(); ++i) {
    const double v = h.values[i];
    const auto c = std::isnan(v) ? std::array<unsigned char, 3>{128, 128, 128} : inferno5((v - lo) / (hi - lo));
    std::copy(c.begin(), c.end(), rgb.begin() + 3 * i);
  }
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw DomainError("cannot open " + path + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw DomainError("libpng failed writing " + path);
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, h.width, h.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int r = 0; r < h.height; ++r) png_write_row(png, rgb.data() + std::size_t(r) * h.width * 3);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

/// fn on the square |Re x|, |Im x| <= radius of a P^1 chart; the top row is
/// Im x = radius.
template <class Fn>
Heatmap chart_heatmap_p1(Fn&& fn, int chart = 0, double radius = 2.0, int pixels = 256) {
  Heatmap h{pixels, pixels, std::vector<double>(std::size_t(pixels) * pixels)};
  const double step = 2 * radius / pixels;
  parallel_for(std::size_t(pixels) * pixels, [&](std::size_t i) {
    const int r = int(i / pixels), c = int(i % pixels);
    const cd x(-radius + (c + 0.5) * step, radius - (r + 0.5) * step);
    h.values[i] = fn(lift<1>(ChartPoint<1>{x}, chart));
  });
  return h;
}

/// Mass of mu per pixel of the same square, divided by the pixel area.
inline Heatmap measure_heatmap_p1(const currents::GridMeasure<1>& mu, int chart = 0, double radius = 2.0,
                                  int pixels = 256) {
  Heatmap h{pixels, pixels, std::vector<double>(std::size_t(pixels) * pixels, 0.0)};
  const double step = 2 * radius / pixels;
  const auto cloud = mu.as_cloud();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& z = cloud.points[i];
    if (std::abs(z[chart]) < 1e-300) continue;
    const cd x = z[1 - chart] / z[chart];
    const int c = int(std::floor((x.real() + radius) / step)), r = int(std::floor((radius - x.imag()) / step));
    if (c < 0 || c >= pixels || r < 0 || r >= pixels) continue;
    h.at(r, c) += cloud.weights[i] / (step * step);
  }
  return h;
}

}  // namespace spc::io
