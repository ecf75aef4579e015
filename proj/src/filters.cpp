#include "mfuse/filters.hpp"

#include <cmath>

namespace mfuse {

std::vector<double> gaussian_kernel(double sigma) {
  check(std::isfinite(sigma) && sigma >= 0.0, "gaussian sigma must be finite and >= 0");
  if (sigma == 0.0) return {1.0};
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
    taps[static_cast<std::size_t>(i + radius)] = w;
    sum += w;
  }
  for (double& w : taps) w /= sum;
  return taps;
}

Raster convolve_separable(const Raster& img, const std::vector<double>& row_taps,
                          const std::vector<double>& col_taps) {
  check(row_taps.size() % 2 == 1 && col_taps.size() % 2 == 1, "kernel length must be odd");
  const int w = img.width();
  const int h = img.height();
  const int rx = static_cast<int>(row_taps.size() / 2);
  const int ry = static_cast<int>(col_taps.size() / 2);

  Raster tmp(w, h);
  std::vector<double> line(static_cast<std::size_t>(w + 2 * rx));
  for (int y = 0; y < h; ++y) {
    for (int i = 0; i < w + 2 * rx; ++i) line[static_cast<std::size_t>(i)] = img.clamped(i - rx, y);
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < row_taps.size(); ++k)
        acc += row_taps[k] * line[static_cast<std::size_t>(x) + k];
      tmp(x, y) = acc;
    }
  }

  Raster out(w, h);
  std::vector<double> acc(static_cast<std::size_t>(w));
  for (int y = 0; y < h; ++y) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int k = -ry; k <= ry; ++k) {
      const double tap = col_taps[static_cast<std::size_t>(k + ry)];
      const int sy = std::clamp(y + k, 0, h - 1);
      for (int x = 0; x < w; ++x) acc[static_cast<std::size_t>(x)] += tap * tmp(x, sy);
    }
    for (int x = 0; x < w; ++x) out(x, y) = acc[static_cast<std::size_t>(x)];
  }
  return out;
}

Raster gaussian_blur(const Raster& img, double sigma) {
  const auto taps = gaussian_kernel(sigma);
  if (taps.size() == 1) return img;
  return convolve_separable(img, taps, taps);
}

ImageF gaussian_blur(const ImageF& img, double sigma) {
  // A normalized non-negative kernel keeps samples in range up to rounding.
  return ImageF::clamped(gaussian_blur(img.raster(), sigma));
}

GradientField sobel_gradient(const Raster& img) {
  const int w = img.width();
  const int h = img.height();
  GradientField g{Raster(w, h), Raster(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double a = img.clamped(x - 1, y - 1), b = img.clamped(x, y - 1),
                   c = img.clamped(x + 1, y - 1);
      const double d = img.clamped(x - 1, y), f = img.clamped(x + 1, y);
      const double p = img.clamped(x - 1, y + 1), q = img.clamped(x, y + 1),
                   r = img.clamped(x + 1, y + 1);
      g.gx(x, y) = ((c - a) + 2.0 * (f - d) + (r - p)) / 8.0;
      g.gy(x, y) = ((p - a) + 2.0 * (q - b) + (r - c)) / 8.0;
    }
  }
  return g;
}

GradientField sobel_gradient(const ImageF& img) { return sobel_gradient(img.raster()); }

Raster gradient_magnitude(const GradientField& g) {
  check(g.gx.same_shape(g.gy), "gradient components differ in size");
  Raster out(g.gx.width(), g.gx.height());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::hypot(g.gx[i], g.gy[i]);
  return out;
}

}  // namespace mfuse
