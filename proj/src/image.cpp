#include "mfuse/image.hpp"

#include <cmath>
#include <numeric>

namespace mfuse {

ImageF::ImageF(int width, int height, double fill) : raster_(width, height, fill) {
  check(std::isfinite(fill) && fill >= 0.0 && fill <= 1.0, "image fill value outside [0,1]");
}

ImageF ImageF::from_raster(Raster raster) {
  check(!raster.empty(), "image must not be empty");
  for (double v : raster.data()) {
    check(std::isfinite(v), "image sample is not finite");
    check(v >= 0.0 && v <= 1.0, "image sample outside [0,1]: " + std::to_string(v));
  }
  return ImageF(std::move(raster));
}

ImageF ImageF::from_samples(int width, int height, std::vector<double> samples) {
  return from_raster(Raster(width, height, std::move(samples)));
}

ImageF ImageF::clamped(Raster raster) {
  check(!raster.empty(), "image must not be empty");
  for (double& v : raster.data()) {
    check(std::isfinite(v), "image sample is not finite");
    v = std::clamp(v, 0.0, 1.0);
  }
  return ImageF(std::move(raster));
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

}  // namespace mfuse
