#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>

#include "mfuse/image.hpp"

namespace mfuse {

enum class BitDepth { k8 = 8, k16 = 16 };

/// Loads an 8/16-bit grayscale or RGB PNG, or a binary PGM (P5).
/// RGB is collapsed to luminance 0.299R + 0.587G + 0.114B; samples are
/// normalized by the format's maximum code value.
ImageF load_image(const std::filesystem::path& path);

struct LoadedImage {
  ImageF image;
  /// Largest code value of the file format (255, 65535 or the PGM maxval).
  double max_code = 255.0;
};
LoadedImage load_image_with_range(const std::filesystem::path& path);

/// Writes grayscale PNG or PGM, chosen by extension (.png / .pgm).
/// Samples are rounded to the nearest code value.
void save_image(const ImageF& img, const std::filesystem::path& path,
                BitDepth depth = BitDepth::k8);

/// 8-bit interleaved RGB raster.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::array<std::uint8_t, 3>> pixels;

  const std::array<std::uint8_t, 3>& operator()(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(x)];
  }
};

void save_rgb_png(const RgbImage& img, const std::filesystem::path& path);

/// 8-bit palette PNG; every index must be < palette.size() <= 256.
void save_indexed_png(const Grid<std::uint8_t>& indices,
                      std::span<const std::array<std::uint8_t, 3>> palette,
                      const std::filesystem::path& path);

/// Rounds a [0,1] sample to an integer code at the given bit depth.
std::uint16_t quantize(double sample, BitDepth depth);

}  // namespace mfuse
