#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mfuse/error.hpp"

namespace mfuse {

/// Row-major 2D grid. The building block for images, masks, label maps and
/// intermediate real-valued rasters.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;

  Grid(int width, int height, T fill = T{}) : width_(width), height_(height) {
    check(width >= 1 && height >= 1, "grid dimensions must be positive, got " +
                                         std::to_string(width) + "x" + std::to_string(height));
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  Grid(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    check(width >= 1 && height >= 1, "grid dimensions must be positive");
    check(data_.size() == static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
          "grid sample count does not match dimensions");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const noexcept { return data_[index(x, y)]; }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  /// Replicate-border access.
  const T& clamped(int x, int y) const noexcept {
    return (*this)(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1));
  }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  const std::vector<T>& values() const noexcept { return data_; }

  template <typename U>
  bool same_shape(const Grid<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Unconstrained real raster (saliency, gradients, weights, pyramid levels).
using Raster = Grid<double>;

/// Binary mask; nonzero means foreground.
using BitMask = Grid<std::uint8_t>;

/// Component labels, 0 = background, components numbered 1..count.
struct LabelMap {
  Grid<int> labels;
  int count = 0;
};

struct GradientField {
  Raster gx;
  Raster gy;
};

/// Single-channel image with every sample finite and in [0,1].
/// Immutable once constructed.
class ImageF {
 public:
  ImageF() = default;
  ImageF(int width, int height, double fill = 0.0);

  /// Validates the range; throws on any sample outside [0,1] or non-finite.
  static ImageF from_raster(Raster raster);
  static ImageF from_samples(int width, int height, std::vector<double> samples);
  /// Clamps into [0,1]; throws on non-finite samples.
  static ImageF clamped(Raster raster);

  int width() const noexcept { return raster_.width(); }
  int height() const noexcept { return raster_.height(); }
  std::size_t size() const noexcept { return raster_.size(); }
  bool empty() const noexcept { return raster_.empty(); }

  double operator()(int x, int y) const noexcept { return raster_(x, y); }
  double operator[](std::size_t i) const noexcept { return raster_[i]; }

  const Raster& raster() const noexcept { return raster_; }
  std::span<const double> samples() const noexcept { return raster_.data(); }

  template <typename U>
  bool same_shape(const Grid<U>& other) const noexcept {
    return raster_.same_shape(other);
  }
  bool same_shape(const ImageF& other) const noexcept { return raster_.same_shape(other.raster_); }

  bool operator==(const ImageF&) const = default;

 private:
  explicit ImageF(Raster raster) : raster_(std::move(raster)) {}
  Raster raster_;
};

double mean(std::span<const double> values);

/// Transposed copy; used by symmetry tests and separable filters.
template <typename T>
Grid<T> transpose(const Grid<T>& g) {
  Grid<T> out(g.height(), g.width());
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < g.width(); ++x) out(y, x) = g(x, y);
  return out;
}

}  // namespace mfuse
