#pragma once

#include <array>
#include <string>
#include <vector>

#include "mfuse/image.hpp"

namespace mfuse {

enum class BaselineKind { kAverage, kLap, kDwt, kPca, kGra, kFsd };

std::string to_string(BaselineKind kind);
BaselineKind parse_baseline_kind(const std::string& name);

struct BaselineMethod {
  BaselineKind kind = BaselineKind::kAverage;
  int levels = 4;
};

/// Fuses two registered images with one of the classic comparison methods.
/// Inputs whose sides are not multiples of 2^levels are padded by
/// replication and the result cropped back.
ImageF baseline_fuse(const ImageF& a, const ImageF& b, const BaselineMethod& method);

/// Global PCA weights (w_a, w_b), non-negative and summing to 1.
std::array<double, 2> pca_weights(const ImageF& a, const ImageF& b);

namespace pyramid {

/// Laplacian pyramid: detail levels followed by the coarse residual.
std::vector<Raster> laplacian_decompose(const Raster& img, int levels);
Raster laplacian_reconstruct(const std::vector<Raster>& pyr);

/// Filter-subtract-decimate pyramid: detail = level - filtered level.
std::vector<Raster> fsd_decompose(const Raster& img, int levels);
Raster fsd_reconstruct(const std::vector<Raster>& pyr);

/// Orthonormal 2D Haar transform, stored as per-level (LH, HL, HH) triples
/// followed by the final approximation band.
struct HaarCoefficients {
  std::vector<std::array<Raster, 3>> details;
  Raster approximation;
};
HaarCoefficients haar_decompose(const Raster& img, int levels);
Raster haar_reconstruct(const HaarCoefficients& coeffs);

/// Reduce / expand with the 5-tap [1,4,6,4,1]/16 generating kernel.
Raster reduce(const Raster& img);
Raster expand(const Raster& img, int width, int height);

}  // namespace pyramid

}  // namespace mfuse
