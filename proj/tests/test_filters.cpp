#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mfuse/error.hpp"
#include "mfuse/filters.hpp"
#include "support.hpp"

namespace mfuse {
namespace {

TEST(GaussianKernel, MatchesSampledDensity) {
  for (double sigma : {0.5, 1.0, 2.3, 11.0}) {
    const auto taps = gaussian_kernel(sigma);
    const int r = static_cast<int>(std::ceil(3.0 * sigma));
    ASSERT_EQ(taps.size(), static_cast<std::size_t>(2 * r + 1));
    double z = 0.0;
    for (int i = -r; i <= r; ++i) z += std::exp(-i * i / (2 * sigma * sigma));
    for (int i = -r; i <= r; ++i)
      EXPECT_NEAR(taps[static_cast<std::size_t>(i + r)], std::exp(-i * i / (2 * sigma * sigma)) / z,
                  1e-15);
  }
}

TEST(GaussianKernel, EdgeCases) {
  EXPECT_EQ(gaussian_kernel(0.0), std::vector<double>{1.0});
  EXPECT_THROW(gaussian_kernel(-1.0), Error);
  EXPECT_THROW(gaussian_kernel(NAN), Error);
}

TEST(GaussianBlur, PreservesConstantsAndMeanOfSymmetricSignal) {
  const Raster c(20, 13, 0.37);
  const auto b = gaussian_blur(c, 2.0);
  for (double v : b.data()) EXPECT_NEAR(v, 0.37, 1e-14);
}

TEST(GaussianBlur, MatchesDirect2dConvolution) {
  std::mt19937_64 rng(1);
  const auto img = testing::random_image(15, 12, 0.0, rng).raster();
  const double sigma = 1.3;
  const auto taps = gaussian_kernel(sigma);
  const int r = static_cast<int>(taps.size() / 2);
  const auto fast = gaussian_blur(img, sigma);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      double acc = 0.0;
      for (int j = -r; j <= r; ++j)
        for (int i = -r; i <= r; ++i)
          acc += taps[static_cast<std::size_t>(i + r)] * taps[static_cast<std::size_t>(j + r)] *
                 img.clamped(x + i, y + j);
      EXPECT_NEAR(fast(x, y), acc, 1e-13);
    }
}

TEST(Sobel, HandEvaluatedStep) {
  Raster step(5, 4, 0.0);
  for (int y = 0; y < 4; ++y)
    for (int x = 2; x < 5; ++x) step(x, y) = 1.0;
  const auto g = sobel_gradient(step);
  for (int y = 0; y < 4; ++y) {
    EXPECT_DOUBLE_EQ(g.gx(0, y), 0.0);
    EXPECT_DOUBLE_EQ(g.gx(1, y), 0.5);
    EXPECT_DOUBLE_EQ(g.gx(2, y), 0.5);
    EXPECT_DOUBLE_EQ(g.gx(3, y), 0.0);
    for (int x = 0; x < 5; ++x) EXPECT_DOUBLE_EQ(g.gy(x, y), 0.0);
  }
}

TEST(Sobel, UnitRampGivesUnitSlopeInside) {
  Raster ramp(6, 6, 0.0);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) ramp(x, y) = y;
  const auto g = sobel_gradient(ramp);
  for (int x = 0; x < 6; ++x) {
    EXPECT_DOUBLE_EQ(g.gy(x, 0), 0.5);
    for (int y = 1; y < 5; ++y) EXPECT_DOUBLE_EQ(g.gy(x, y), 1.0);
  }
  const auto m = gradient_magnitude(g);
  EXPECT_DOUBLE_EQ(m(3, 3), 1.0);
}

TEST(GaussianBlur, MeanDriftIsSmallOnArbitraryImages) {
  std::mt19937_64 rng(3);
  for (double sigma : {1.0, 2.0, 3.0, 5.0}) {
    const auto img = testing::random_image(256, 256, 0.0, rng).raster();
    EXPECT_LT(std::abs(mean(gaussian_blur(img, sigma).data()) - mean(img.data())), 1e-3);
  }
}

}  // namespace
}  // namespace mfuse
