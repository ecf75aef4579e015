#pragma once

#include <span>
#include <string>
#include <vector>

#include "mfuse/image.hpp"

namespace mfuse {

/// Space in which the weighted combination of sources is formed.
enum class FusionDomain { kPixel, kGradient };

std::string to_string(FusionDomain domain);
FusionDomain parse_fusion_domain(const std::string& name);

/// Parameters of the dual-scale pipeline. Defaults are in pixels.
struct FusionConfig {
  double sigma_large = 11.0;
  double sigma_small = 1.0;
  int close_radius = 5;
  int band_radius = 11;
  FusionDomain domain = FusionDomain::kPixel;

  /// Throws unless sigma_large > sigma_small > 0, close_radius >= 0 and
  /// band_radius >= 1.
  void validate() const;

  /// JSON document mirroring the fields above (plus "tie_break":"lowest_index").
  std::string to_json() const;
  /// Missing keys keep their defaults; unknown keys are rejected.
  static FusionConfig from_json(const std::string& text);
};

/// Per-pixel decision: index of the source the pixel is focused in, or kUnknown.
struct TriMap {
  static constexpr int kUnknown = -1;

  Grid<int> labels;
  int n_sources = 0;

  int width() const noexcept { return labels.width(); }
  int height() const noexcept { return labels.height(); }
};

/// One weight raster per source; every pixel's weights sum to 1.
struct WeightMaps {
  std::vector<Raster> maps;

  int n_sources() const noexcept { return static_cast<int>(maps.size()); }
  /// Largest |sum_n w_n - 1| over all pixels.
  double max_partition_error() const;
};

struct FusionResult {
  ImageF fused;
  WeightMaps weights;
  TriMap trimap;
  std::vector<Raster> saliency_large;
  std::vector<Raster> saliency_small;
  std::vector<BitMask> initial_regions;
  std::vector<BitMask> refined_regions;
};

/// Gaussian-smoothed squared gradient magnitude.
Raster focus_saliency(const ImageF& img, double sigma);

/// Strict per-pixel argmax; ties go to the lowest source index.
std::vector<BitMask> detect_focus_regions(std::span<const Raster> saliencies);

/// close -> keep largest component -> fill holes.
BitMask refine_region(const BitMask& mask, int close_radius);

/// A pixel is unknown when any refined mask changes value within Chebyshev
/// distance band_radius of it, or when zero or several masks claim it.
TriMap build_trimap(std::span<const BitMask> refined, int band_radius);

/// Hard 0/1 weights on labeled pixels; normalized small-scale saliency in the
/// unknown band, uniform when the saliency sum vanishes.
WeightMaps compute_weights(const TriMap& trimap, std::span<const Raster> small_saliencies);

ImageF fuse_weighted(std::span<const ImageF> images, const WeightMaps& weights,
                     FusionDomain domain);

/// Controls for the least-squares gradient integrator.
struct ReconstructOptions {
  double relative_tolerance = 1e-6;
  int max_iterations = 10000;
};

struct ReconstructStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Least-squares F with sobel_gradient(F) ~ g (replicate borders, i.e.
/// zero flux), shifted to the requested mean and clamped to [0,1].
ImageF reconstruct_from_gradients(const GradientField& g, double anchor_mean,
                                  const ReconstructOptions& options = {},
                                  ReconstructStats* stats = nullptr);

/// Full pipeline. Validates every input before any computation.
FusionResult mwgf_fuse(std::span<const ImageF> images, const FusionConfig& config = {});

}  // namespace mfuse
