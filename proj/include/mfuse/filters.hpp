#pragma once

#include <vector>

#include "mfuse/image.hpp"

namespace mfuse {

/// Normalized 1D Gaussian taps for radius ceil(3 sigma); sigma 0 gives {1}.
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian with replicate borders. sigma == 0 is the identity.
Raster gaussian_blur(const Raster& img, double sigma);
ImageF gaussian_blur(const ImageF& img, double sigma);

/// Separable convolution with replicate borders; taps are centered.
Raster convolve_separable(const Raster& img, const std::vector<double>& row_taps,
                          const std::vector<double>& col_taps);

/// 3x3 Sobel scaled by 1/8, so a unit-slope ramp yields 1.0 per pixel.
GradientField sobel_gradient(const Raster& img);
GradientField sobel_gradient(const ImageF& img);

Raster gradient_magnitude(const GradientField& g);

}  // namespace mfuse
