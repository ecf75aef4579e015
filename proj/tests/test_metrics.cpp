#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "mfuse/error.hpp"
#include "mfuse/metrics.hpp"

namespace mfuse {
namespace {

ImageF checker(int w, int h, double lo, double hi) {
  std::vector<double> s;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) s.push_back((x + y) % 2 ? hi : lo);
  return ImageF::from_samples(w, h, s);
}

TEST(Metrics, EntropyOfEqualTwoLevelImageIsOneBit) {
  EXPECT_DOUBLE_EQ(entropy(checker(8, 8, 0.0, 1.0)), 1.0);
  EXPECT_DOUBLE_EQ(entropy(ImageF(5, 5, 0.3)), 0.0);
  // Four equiprobable codes.
  const auto img = ImageF::from_samples(2, 2, {0.0, 10 / 255.0, 20 / 255.0, 30 / 255.0});
  EXPECT_DOUBLE_EQ(entropy(img), 2.0);
}

TEST(Metrics, AverageGradientOfRamp) {
  // Horizontal ramp with slope 3 codes/pixel: sqrt(9/2) everywhere.
  std::vector<double> s;
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 6; ++x) s.push_back(3.0 * x / 255.0);
  EXPECT_NEAR(average_gradient(ImageF::from_samples(6, 4, s)), std::sqrt(4.5), 1e-12);
  EXPECT_NEAR(average_gradient(checker(4, 4, 0.0, 1.0)), 255.0, 1e-9);
  EXPECT_THROW(average_gradient(ImageF(1, 5, 0.0)), Error);
}

TEST(Metrics, StdDevIsPopulation) {
  EXPECT_NEAR(std_dev(checker(4, 4, 0.0, 1.0)), 127.5, 1e-12);
  EXPECT_NEAR(std_dev(ImageF(3, 3, 0.7)), 0.0, 1e-12);
}

TEST(Metrics, EdgeStrengthOfVerticalStep) {
  std::vector<double> s;
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) s.push_back(x >= 2 ? 1.0 : 0.0);
  // Columns 1 and 2 carry |gx| = 0.5; columns 0 and 3 carry 0.
  EXPECT_NEAR(edge_strength(ImageF::from_samples(4, 4, s)), 0.25 * 255.0, 1e-12);
}

TEST(Metrics, Mse) {
  EXPECT_NEAR(mse(ImageF(2, 2, 0.0), ImageF(2, 2, 10 / 255.0)), 100.0, 1e-10);
  EXPECT_THROW(mse(ImageF(2, 2), ImageF(3, 2)), Error);
}

TEST(Metrics, RoundSig6) {
  EXPECT_EQ(round_sig6(3.14159265), 3.14159);
  EXPECT_EQ(round_sig6(123456789.0), 123457000.0);
  EXPECT_EQ(round_sig6(0.0), 0.0);
}

TEST(Metrics, ReportJsonLayout) {
  const auto img = checker(4, 4, 0.0, 1.0);
  const auto j = nlohmann::json::parse(metric_report(img).to_json());
  EXPECT_EQ(j.size(), 5u);
  EXPECT_TRUE(j["mse"].is_null());
  EXPECT_DOUBLE_EQ(j["entropy"].get<double>(), 1.0);
  const auto ref = ImageF(4, 4, 0.0);
  const auto k = nlohmann::json::parse(metric_report(img, &ref).to_json());
  EXPECT_NEAR(k["mse"].get<double>(), 255.0 * 255.0 / 2, 1e-6);
}

ImageF noise(int w, int h, unsigned seed, double scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, scale);
  std::vector<double> s(static_cast<std::size_t>(w * h));
  for (auto& v : s) v = u(rng);
  return ImageF::from_samples(w, h, s);
}

TEST(MetricProperties, EntropyIgnoresPixelOrder) {
  const auto img = noise(16, 16, 1, 1.0);
  std::vector<double> s(img.samples().begin(), img.samples().end());
  std::mt19937_64 rng(2);
  std::shuffle(s.begin(), s.end(), rng);
  EXPECT_DOUBLE_EQ(entropy(ImageF::from_samples(16, 16, s)), entropy(img));
  EXPECT_LE(entropy(img), 8.0);
}

TEST(MetricProperties, LinearInIntensityScale) {
  const auto img = noise(20, 12, 3, 0.4);
  std::vector<double> s(img.samples().begin(), img.samples().end());
  for (auto& v : s) v *= 2.5;
  const auto scaled = ImageF::from_samples(20, 12, s);
  EXPECT_NEAR(std_dev(scaled), 2.5 * std_dev(img), 1e-9);
  EXPECT_NEAR(average_gradient(scaled), 2.5 * average_gradient(img), 1e-9);
  EXPECT_NEAR(edge_strength(scaled), 2.5 * edge_strength(img), 1e-9);
}

TEST(MetricProperties, MseSymmetryAndTriangle) {
  for (unsigned k = 0; k < 20; ++k) {
    const auto a = noise(9, 9, 3 * k, 1.0), b = noise(9, 9, 3 * k + 1, 1.0),
               c = noise(9, 9, 3 * k + 2, 1.0);
    EXPECT_DOUBLE_EQ(mse(a, b), mse(b, a));
    EXPECT_LE(std::sqrt(mse(a, c)), std::sqrt(mse(a, b)) + std::sqrt(mse(b, c)) + 1e-12);
    EXPECT_EQ(mse(a, a), 0.0);
  }
}

TEST(MetricProperties, ReportMatchesMemberFunctions) {
  const auto img = noise(10, 10, 9, 1.0), ref = noise(10, 10, 10, 1.0);
  const auto r = metric_report(img, &ref);
  EXPECT_EQ(r.entropy, entropy(img));
  EXPECT_EQ(r.average_gradient, average_gradient(img));
  EXPECT_EQ(r.std_dev, std_dev(img));
  EXPECT_EQ(r.edge_strength, edge_strength(img));
  EXPECT_EQ(*r.mse, mse(img, ref));
  const auto flat = metric_report(ImageF(6, 6, 0.4));
  EXPECT_NEAR(flat.entropy + flat.average_gradient + flat.std_dev + flat.edge_strength, 0.0, 1e-12);
  EXPECT_FALSE(flat.mse.has_value());
}

}  // namespace
}  // namespace mfuse
