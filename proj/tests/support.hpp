#pragma once

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>

#include "mfuse/filters.hpp"
#include "mfuse/image.hpp"

namespace mfuse::testing {

inline BitMask random_mask(int w, int h, double density, std::mt19937_64& rng) {
  std::bernoulli_distribution on(density);
  BitMask m(w, h, 0);
  for (auto& v : m.data()) v = on(rng) ? 1 : 0;
  return m;
}

/// Blobby mask: thresholded smoothed noise.
inline BitMask random_blob_mask(int w, int h, double sigma, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Raster r(w, h, 0.0);
  for (auto& v : r.data()) v = u(rng);
  r = gaussian_blur(r, sigma);
  const double t = mean(r.data());
  BitMask m(w, h, 0);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = r[i] > t ? 1 : 0;
  return m;
}

inline ImageF random_image(int w, int h, double sigma, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Raster r(w, h, 0.0);
  for (auto& v : r.data()) v = u(rng);
  if (sigma > 0.0) {
    r = gaussian_blur(r, sigma);
    double lo = r[0];
    double hi = r[0];
    for (double v : r.data()) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    for (auto& v : r.data()) v = (v - lo) / (hi - lo);
  }
  return ImageF::clamped(r);
}

/// Fresh directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("mfuse-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace mfuse::testing

namespace mfuse::testing {

/// N sources of one texture; source n is sharp in the n-th vertical strip
/// and blurred elsewhere.
inline std::vector<ImageF> strip_sources(const ImageF& base, int n_sources, double blur) {
  const ImageF soft = gaussian_blur(base, blur);
  std::vector<ImageF> out;
  const int w = base.width();
  for (int n = 0; n < n_sources; ++n) {
    Raster r = soft.raster();
    const int x0 = n * w / n_sources;
    const int x1 = (n + 1) * w / n_sources;
    for (int y = 0; y < base.height(); ++y)
      for (int x = x0; x < x1; ++x) r(x, y) = base(x, y);
    out.push_back(ImageF::from_raster(r));
  }
  return out;
}

}  // namespace mfuse::testing
