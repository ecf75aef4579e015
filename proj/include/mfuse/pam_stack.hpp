#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfuse/image.hpp"
#include "mfuse/image_io.hpp"
#include "mfuse/mwgf.hpp"

namespace mfuse {

/// Photoacoustic amplitude volume, x fastest, then y, then z.
class Volume {
 public:
  Volume() = default;
  /// Amplitudes must be finite and >= 0; dz_um > 0.
  Volume(int nx, int ny, int nz, double dz_um, std::vector<float> amplitudes);

  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  int nz() const noexcept { return nz_; }
  double dz_um() const noexcept { return dz_um_; }

  float operator()(int x, int y, int z) const noexcept {
    return amplitudes_[(static_cast<std::size_t>(z) * static_cast<std::size_t>(ny_) +
                        static_cast<std::size_t>(y)) *
                           static_cast<std::size_t>(nx_) +
                       static_cast<std::size_t>(x)];
  }
  std::span<const float> amplitudes() const noexcept { return amplitudes_; }
  /// Slice z as a raster (values not clamped).
  Raster slice(int z) const;

  bool operator==(const Volume&) const = default;

 private:
  int nx_ = 0;
  int ny_ = 0;
  int nz_ = 0;
  double dz_um_ = 1.0;
  std::vector<float> amplitudes_;
};

/// Per-pixel z index of the projected maximum.
struct DepthMap {
  Grid<int> z;
  int nz = 1;
};

/// Parsed acquisition manifest. Slice paths and the raw path are resolved
/// relative to the manifest's directory.
struct StackManifest {
  int nx = 0;
  int ny = 0;
  int nz = 0;
  double dz_um = 1.0;
  double focal_depth_um = 0.0;
  std::vector<std::filesystem::path> slices;
  std::optional<std::filesystem::path> raw;
  /// Value mapped to amplitude 1.0. Defaults to the slice format's maximum
  /// code for image slices and to 1.0 for raw blocks.
  std::optional<double> amplitude_scale;

  static StackManifest read(const std::filesystem::path& manifest_path);
  void write(const std::filesystem::path& manifest_path) const;
};

Volume load_volume(const std::filesystem::path& manifest_path);
Volume load_volume(const StackManifest& manifest);

enum class VolumeStorage { kRaw, kSlices16 };

/// Writes the data files next to the manifest and then the manifest itself.
/// Raw storage is bit-exact; 16-bit slices require amplitudes in [0,1].
void save_volume(const Volume& vol, const std::filesystem::path& manifest_path,
                 double focal_depth_um, VolumeStorage storage = VolumeStorage::kRaw);

/// Raw block of little-endian float32, x fastest.
std::vector<float> read_raw_f32(const std::filesystem::path& path, std::size_t count);
void write_raw_f32(const std::filesystem::path& path, std::span<const float> values);

struct Projection {
  ImageF map;
  DepthMap depth;
};

/// Max amplitude projection along z; depth is the shallowest maximizing index.
/// Amplitudes above 1 are clamped in the map.
Projection map_projection(const Volume& vol);

/// Anchors of the blue->cyan->green->yellow->red depth palette:
/// normalized position and RGB in [0,1]. Hue is linear in position.
struct PaletteAnchor {
  double position;
  double r, g, b;
};
std::span<const PaletteAnchor> depth_palette();

/// Fully saturated palette color at normalized depth t in [0,1].
std::array<double, 3> palette_color(double t);

/// Hue from physical depth z*dz over [0, (nz-1)*dz], value from amplitude.
RgbImage depth_code(const ImageF& map, const DepthMap& depth, double dz_um);

struct Acquisition {
  ImageF map;
  DepthMap depth;
  double focal_depth_um = 0.0;
};

struct StackFusion {
  ImageF map;
  DepthMap depth;
  RgbImage color;
  FusionResult detail;
};

/// MWGF on the MAP images; fused depth comes from the source with the
/// largest weight at each pixel (lowest index on ties).
StackFusion fuse_stacks(std::span<const Acquisition> acquisitions, double dz_um,
                        const FusionConfig& config = {});

}  // namespace mfuse
