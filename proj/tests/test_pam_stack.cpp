#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "mfuse/error.hpp"
#include "mfuse/pam_stack.hpp"
#include "support.hpp"

namespace mfuse {
namespace {

using testing::TempDir;

Volume random_volume(int nx, int ny, int nz, std::mt19937_64& rng) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::vector<float> a(static_cast<std::size_t>(nx * ny * nz));
  for (auto& v : a) v = u(rng);
  return Volume(nx, ny, nz, 2.5, std::move(a));
}

Volume permuted(const Volume& v, const std::vector<int>& perm) {
  std::vector<float> a(v.amplitudes().size());
  const std::size_t plane = static_cast<std::size_t>(v.nx() * v.ny());
  for (int z = 0; z < v.nz(); ++z)
    for (std::size_t i = 0; i < plane; ++i)
      a[static_cast<std::size_t>(z) * plane + i] =
          v.amplitudes()[static_cast<std::size_t>(perm[static_cast<std::size_t>(z)]) * plane + i];
  return Volume(v.nx(), v.ny(), v.nz(), v.dz_um(), std::move(a));
}

TEST(MapProjection, MaxDominanceAndPermutationInvariance) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> side(1, 64), depth(1, 32);
  for (int trial = 0; trial < 50; ++trial) {
    const auto vol = random_volume(side(rng), side(rng), depth(rng), rng);
    const auto p = map_projection(vol);
    for (int y = 0; y < vol.ny(); ++y)
      for (int x = 0; x < vol.nx(); ++x) {
        for (int z = 0; z < vol.nz(); ++z) ASSERT_GE(p.map(x, y), vol(x, y, z));
        ASSERT_EQ(p.map(x, y), static_cast<double>(vol(x, y, p.depth.z(x, y))));
      }
    std::vector<int> perm(static_cast<std::size_t>(vol.nz()));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    EXPECT_EQ(map_projection(permuted(vol, perm)).map, p.map);
  }
}

TEST(MapProjection, TiesTakeShallowestSlice) {
  const Volume v(1, 1, 3, 1.0, {0.2f, 0.7f, 0.7f});
  EXPECT_EQ(map_projection(v).depth.z(0, 0), 1);
}

TEST(Manifest, RawRoundTripIsBitExact) {
  TempDir dir;
  std::mt19937_64 rng(2);
  const auto vol = random_volume(13, 7, 5, rng);
  save_volume(vol, dir / "stack.json", 42.0, VolumeStorage::kRaw);
  EXPECT_EQ(load_volume(dir / "stack.json"), vol);
  const auto m = StackManifest::read(dir / "stack.json");
  EXPECT_EQ(m.focal_depth_um, 42.0);
  EXPECT_EQ(m.nz, 5);
}

TEST(Manifest, SixteenBitSlicesRoundTripToQuantization) {
  TempDir dir;
  std::mt19937_64 rng(3);
  const auto vol = random_volume(6, 4, 3, rng);
  save_volume(vol, dir / "s.json", 0.0, VolumeStorage::kSlices16);
  const auto back = load_volume(dir / "s.json");
  for (std::size_t i = 0; i < vol.amplitudes().size(); ++i)
    EXPECT_NEAR(back.amplitudes()[i], vol.amplitudes()[i], 0.5 / 65535 + 1e-7);
}

TEST(Manifest, AmplitudeScaleDividesRawValues) {
  TempDir dir;
  const std::vector<float> raw{0.0f, 50.0f, 100.0f, 25.0f};
  write_raw_f32(dir / "v.raw", raw);
  std::ofstream(dir / "m.json") << R"({"nx":2,"ny":2,"nz":1,"dz_um":1,"raw":"v.raw","amplitude_scale":100})";
  const auto v = load_volume(dir / "m.json");
  EXPECT_FLOAT_EQ(v(1, 0, 0), 0.5f);
  EXPECT_FLOAT_EQ(v(0, 1, 0), 1.0f);
}

TEST(Manifest, RejectsInconsistentInputs) {
  TempDir dir;
  write_raw_f32(dir / "v.raw", std::vector<float>{0.1f, 0.2f, 0.3f});
  std::ofstream(dir / "short.json") << R"({"nx":2,"ny":2,"nz":1,"dz_um":1,"raw":"v.raw"})";
  EXPECT_THROW(load_volume(dir / "short.json"), Error);

  write_raw_f32(dir / "n.raw", std::vector<float>{0.1f, -0.2f});
  std::ofstream(dir / "neg.json") << R"({"nx":2,"ny":1,"nz":1,"dz_um":1,"raw":"n.raw"})";
  EXPECT_THROW(load_volume(dir / "neg.json"), Error);

  std::ofstream(dir / "both.json")
      << R"({"nx":2,"ny":1,"nz":1,"dz_um":1,"raw":"n.raw","slices":["a.png"]})";
  EXPECT_THROW(StackManifest::read(dir / "both.json"), Error);

  std::ofstream(dir / "miss.json") << R"({"nx":2,"ny":1,"nz":2,"dz_um":1,"slices":["a.png","b.png"]})";
  try {
    load_volume(dir / "miss.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("slice 0"), std::string::npos);
  }
  std::ofstream(dir / "count.json") << R"({"nx":2,"ny":1,"nz":3,"dz_um":1,"slices":["a.png"]})";
  EXPECT_THROW(load_volume(dir / "count.json"), Error);
  std::ofstream(dir / "dz.json") << R"({"nx":2,"ny":1,"nz":1,"dz_um":0,"raw":"n.raw"})";
  EXPECT_THROW(StackManifest::read(dir / "dz.json"), Error);
}

double hue_degrees(const std::array<double, 3>& c) {
  const double mx = std::max({c[0], c[1], c[2]}), mn = std::min({c[0], c[1], c[2]});
  const double d = mx - mn;
  double h;
  if (mx == c[0]) h = std::fmod((c[1] - c[2]) / d, 6.0);
  else if (mx == c[1]) h = (c[2] - c[0]) / d + 2.0;
  else h = (c[0] - c[1]) / d + 4.0;
  h *= 60.0;
  return h < 0 ? h + 360.0 : h;
}

TEST(Palette, HueFallsLinearlyFromBlueToRed) {
  for (int i = 0; i <= 64; ++i) {
    const double t = i / 64.0;
    const auto c = palette_color(t);
    EXPECT_NEAR(hue_degrees(c), 240.0 * (1.0 - t), 1e-9) << "t=" << t;
    EXPECT_NEAR(std::max({c[0], c[1], c[2]}), 1.0, 1e-12);
  }
  EXPECT_EQ(palette_color(-1.0), (std::array<double, 3>{0, 0, 1}));
  EXPECT_EQ(palette_color(2.0), (std::array<double, 3>{1, 0, 0}));
}

TEST(DepthCode, ColorScaledByAmplitude) {
  const auto map = ImageF::from_samples(3, 1, {1.0, 0.5, 1.0});
  const DepthMap d{Grid<int>(3, 1, std::vector<int>{0, 2, 4}), 5};
  const auto rgb = depth_code(map, d, 10.0);
  EXPECT_EQ(rgb(0, 0), (std::array<std::uint8_t, 3>{0, 0, 255}));
  EXPECT_EQ(rgb(1, 0), (std::array<std::uint8_t, 3>{0, 128, 0}));
  EXPECT_EQ(rgb(2, 0), (std::array<std::uint8_t, 3>{255, 0, 0}));
  const DepthMap bad{Grid<int>(3, 1, 9), 5};
  EXPECT_THROW(depth_code(map, bad, 10.0), Error);
}

TEST(FuseStacks, DepthFollowsTheDominantWeight) {
  std::mt19937_64 rng(4);
  const auto base = testing::random_image(96, 96, 1.0, rng);
  const auto src = testing::strip_sources(base, 2, 3.0);
  std::vector<Acquisition> acq;
  for (int n = 0; n < 2; ++n)
    acq.push_back({src[static_cast<std::size_t>(n)], DepthMap{Grid<int>(96, 96, 3 * n), 4},
                   30.0 * n});
  const auto f = fuse_stacks(acq, 10.0);
  const auto& w = f.detail.weights.maps;
  for (std::size_t i = 0; i < base.size(); ++i)
    EXPECT_EQ(f.depth.z[i], w[1][i] > w[0][i] ? 3 : 0);
  EXPECT_EQ(f.depth.z(2, 50), 0);
  EXPECT_EQ(f.depth.z(93, 50), 3);
  EXPECT_EQ(f.color.width, 96);
}

TEST(Manifest, EightBitSliceCode255IsUnitAmplitude) {
  TempDir dir;
  save_image(ImageF(1, 1, 1.0), dir / "z0.png");
  std::ofstream(dir / "m.json") << R"({"nx":1,"ny":1,"nz":1,"dz_um":1,"slices":["z0.png"]})";
  EXPECT_EQ(load_volume(dir / "m.json")(0, 0, 0), 1.0f);
}

TEST(DepthCode, DegenerateCases) {
  const auto map = ImageF::from_samples(2, 1, {0.0, 1.0});
  const auto black = depth_code(map, DepthMap{Grid<int>(2, 1, 3), 4}, 5.0);
  EXPECT_EQ(black(0, 0), (std::array<std::uint8_t, 3>{0, 0, 0}));
  // nz = 1: every pixel takes the first hue.
  const auto flat = depth_code(ImageF(3, 2, 1.0), DepthMap{Grid<int>(3, 2, 0), 1}, 5.0);
  for (const auto& px : flat.pixels) EXPECT_EQ(px, (std::array<std::uint8_t, 3>{0, 0, 255}));
}

TEST(FuseStacks, IdenticalAcquisitionsKeepTheMap) {
  std::mt19937_64 rng(5);
  const auto img = testing::random_image(64, 64, 1.0, rng);
  const std::vector<Acquisition> acq(2, Acquisition{img, DepthMap{Grid<int>(64, 64, 1), 3}, 0.0});
  const auto f = fuse_stacks(acq, 4.0);
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_NEAR(f.map[i], img[i], 1e-6);
}

}  // namespace
}  // namespace mfuse
