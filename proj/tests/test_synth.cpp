#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "mfuse/error.hpp"
#include "mfuse/synth.hpp"
#include "support.hpp"

namespace mfuse::synth {
namespace {

// Direct 2D Gaussian convolution at one pixel with replicate borders.
double blurred_at(const ImageF& img, int x, int y, double sigma) {
  if (sigma == 0.0) return img(x, y);
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  double acc = 0.0, norm = 0.0;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      const double w = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
      const int sx = std::clamp(x + dx, 0, img.width() - 1);
      const int sy = std::clamp(y + dy, 0, img.height() - 1);
      acc += w * img(sx, sy);
      norm += w;
    }
  return acc / norm;
}

TEST(Synth, SceneNamesRoundTrip) {
  for (auto k : {SceneKind::kTwoPlane, SceneKind::kVessels, SceneKind::kClocks, SceneKind::kLadder})
    EXPECT_EQ(parse_scene_kind(to_string(k)), k);
  EXPECT_THROW(parse_scene_kind("planet"), Error);
}

TEST(Synth, ScenesAreDeterministicPerSeed) {
  for (auto k : {SceneKind::kTwoPlane, SceneKind::kVessels, SceneKind::kClocks, SceneKind::kLadder}) {
    const auto a = make_scene(k, 96, 80, 7);
    const auto b = make_scene(k, 96, 80, 7);
    const auto c = make_scene(k, 96, 80, 8);
    EXPECT_EQ(a.gt, b.gt);
    EXPECT_EQ(a.depth_um, b.depth_um);
    EXPECT_NE(a.gt, c.gt);
    EXPECT_EQ(a.gt.width(), 96);
    EXPECT_EQ(a.gt.height(), 80);
  }
  EXPECT_THROW(make_scene(SceneKind::kClocks, 63, 100, 1), Error);
}

TEST(Synth, DepthLayouts) {
  const auto tp = make_scene(SceneKind::kTwoPlane, 128, 64, 1);
  EXPECT_EQ(distinct_depths(tp.depth_um), (std::vector<double>{0.0, 100.0}));
  EXPECT_EQ(tp.depth_um(10, 10), 0.0);
  EXPECT_EQ(tp.depth_um(120, 10), 100.0);
  const auto ladder = make_scene(SceneKind::kLadder, 220, 64, 1);
  EXPECT_EQ(distinct_depths(ladder.depth_um).size(), 11u);
  const auto clocks = make_scene(SceneKind::kClocks, 128, 128, 1);
  EXPECT_EQ(distinct_depths(clocks.depth_um), (std::vector<double>{0.0, 100.0}));
  for (double d : distinct_depths(make_scene(SceneKind::kVessels, 128, 128, 2).depth_um)) {
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 200.0);
  }
}

TEST(Synth, DefocusSigma) {
  EXPECT_EQ(defocus_sigma(50, 50, 120), 0.0);
  EXPECT_DOUBLE_EQ(defocus_sigma(0, 60, 120), 2.0);
  EXPECT_DOUBLE_EQ(defocus_sigma(300, 0, 120), kSigmaMax);
  EXPECT_EQ(defocus_sigma(300, 0, std::numeric_limits<double>::infinity()), 0.0);
}

TEST(Synth, RenderMatchesPerRegionBlur) {
  const auto scene = make_scene(SceneKind::kTwoPlane, 96, 64, 3);
  const auto img = defocus_render(scene, 30.0, 120.0);
  for (auto [x, y] : {std::pair{3, 5}, {20, 30}, {47, 63}, {48, 0}, {70, 33}, {95, 63}}) {
    const double s = defocus_sigma(scene.depth_um(x, y), 30.0, 120.0);
    EXPECT_NEAR(img(x, y), blurred_at(scene.gt, x, y, s), 1e-12) << x << "," << y;
  }
}

TEST(Synth, InfiniteDofIsAllInFocus) {
  const auto scene = make_scene(SceneKind::kVessels, 80, 80, 4);
  EXPECT_EQ(defocus_render(scene, 0.0, std::numeric_limits<double>::infinity()), scene.gt);
  EXPECT_THROW(defocus_render(scene, 0.0, 0.0), Error);
}

TEST(Synth, ManyDepthsInterpolateBetweenLevels) {
  // dof 300 gives eleven distinct sigmas d/75, so the nine uniform levels apply.
  const auto scene = make_scene(SceneKind::kLadder, 220, 64, 5);
  const auto img = defocus_render(scene, 0.0, 300.0);
  EXPECT_EQ(img(10, 30), scene.gt(10, 30));
  // Band at 60 um: sigma 0.8 lies between levels 0.5 and 1.0.
  const int x = 3 * (220 / 11) + 10;
  ASSERT_EQ(scene.depth_um(x, 30), 60.0);
  const double f = (0.8 - 0.5) / 0.5;
  EXPECT_NEAR(img(x, 30),
              (1 - f) * blurred_at(scene.gt, x, 30, 0.5) + f * blurred_at(scene.gt, x, 30, 1.0),
              1e-12);
}

TEST(Synth, InFocusSupportCountsNearPeakSamples) {
  const std::vector<DofSample> c{{0, 10}, {20, 7}, {40, 6.9}, {60, 10}};
  EXPECT_EQ(in_focus_support(c), 3);
  EXPECT_EQ(in_focus_support(c, 1.0), 2);
  EXPECT_EQ(in_focus_support(std::vector<DofSample>{}), 0);
}

TEST(Synth, DofCurveValidates) {
  const auto scene = make_scene(SceneKind::kTwoPlane, 96, 96, 1);
  const std::vector<AcquisitionSpec> one{{0.0, 120.0}}, two{{0.0, 120.0}, {100.0, 120.0}};
  const std::vector<double> probes{0.0, 100.0}, bad{0.0, 50.0};
  EXPECT_THROW(dof_curve(scene, two, DofFusion::kNone, probes), Error);
  EXPECT_THROW(dof_curve(scene, one, DofFusion::kMwgf, probes), Error);
  EXPECT_THROW(dof_curve(scene, one, DofFusion::kNone, bad), Error);
  const auto single = dof_curve(scene, one, DofFusion::kNone, probes);
  ASSERT_EQ(single.size(), 2u);
  EXPECT_GT(single[0].sharpness, single[1].sharpness);
}

TEST(Synth, BandLimitedNoiseHasUniformMarginal) {
  Rng rng(9);
  const auto r = band_limited_noise(128, 128, 3.0, rng, 0.2, 0.6);
  int below = 0;
  for (double v : r.data()) {
    EXPECT_GE(v, 0.2);
    EXPECT_LE(v, 0.6);
    below += v < 0.3;
  }
  EXPECT_NEAR(below / static_cast<double>(r.size()), 0.25, 0.05);
}

TEST(Synth, RngIsPortable) {
  Rng a(1), b(1);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.uniform(), b.uniform());
  Rng c(5);
  double sum = 0, sq = 0;
  for (int i = 0; i < 20000; ++i) {
    const double n = c.normal();
    sum += n;
    sq += n * n;
  }
  EXPECT_NEAR(sum / 20000, 0.0, 0.03);
  EXPECT_NEAR(sq / 20000, 1.0, 0.05);
}

TEST(Synth, VesselTextureIsNotDegenerate) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto s = make_scene(SceneKind::kVessels, 256, 256, seed);
    double m = 0, ss = 0;
    for (double v : s.gt.samples()) m += v;
    m /= s.gt.size();
    for (double v : s.gt.samples()) ss += (v - m) * (v - m);
    EXPECT_GT(255.0 * std::sqrt(ss / s.gt.size()), 10.0);
  }
}

TEST(Synth, ConstantSceneIsUnchangedByBlur) {
  Scene s{ImageF(70, 70, 0.4), Raster(70, 70, 0.0)};
  for (int x = 0; x < 70; ++x) s.depth_um(x, 5) = 150.0;
  const auto r = defocus_render(s, 0.0, 120.0);
  for (double v : r.samples()) EXPECT_NEAR(v, 0.4, 1e-12);
}

TEST(Synth, SingleFocusCurvePeaksAtFocusAndFallsOff) {
  // Every band carries the same texture tile so only the blur differs. The two
  // outer bands keep probed bands away from the image border.
  constexpr int kBand = 48, kBands = 13, kH = 64;
  std::mt19937_64 rng(2);
  const auto tile = mfuse::testing::random_image(kBand, kH, 1.0, rng);
  std::vector<double> gt;
  Raster depth(kBand * kBands, kH);
  for (int y = 0; y < kH; ++y)
    for (int x = 0; x < kBand * kBands; ++x) {
      gt.push_back(tile(x % kBand, y));
      depth(x, y) = 20.0 * (x / kBand - 1);
    }
  const Scene scene{ImageF::from_samples(kBand * kBands, kH, gt), depth};
  std::vector<double> probes;
  for (int b = 0; b <= 10; ++b) probes.push_back(20.0 * b);
  for (double focus : {0.0, 100.0, 200.0}) {
    const AcquisitionSpec spec{focus, 120.0};
    const auto curve = dof_curve(scene, std::span(&spec, 1), DofFusion::kNone, probes);
    for (std::size_t i = 0; i < curve.size(); ++i)
      for (std::size_t j = 0; j < curve.size(); ++j)
        if (std::abs(curve[j].depth_um - focus) > std::abs(curve[i].depth_um - focus))
          EXPECT_LE(curve[j].sharpness, curve[i].sharpness + 1e-9)
              << "focus " << focus << " probes " << curve[i].depth_um << " " << curve[j].depth_um;
  }
}

TEST(Synth, OffFocusErrorGrowsWithFocalOffset) {
  const auto scene = make_scene(SceneKind::kTwoPlane, 128, 96, 4);
  double prev = -1.0;
  for (double focus : {100.0, 80.0, 60.0, 40.0, 20.0, 0.0, -50.0}) {
    const auto r = defocus_render(scene, focus, 120.0);
    double se = 0.0;
    for (int y = 0; y < 96; ++y)
      for (int x = 64; x < 128; ++x) se += std::pow(r(x, y) - scene.gt(x, y), 2);
    EXPECT_GE(se, prev);
    prev = se;
  }
}

}  // namespace
}  // namespace mfuse::synth
