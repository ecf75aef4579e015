#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mfuse/image.hpp"
#include "mfuse/mwgf.hpp"

namespace mfuse::synth {

enum class SceneKind { kTwoPlane, kVessels, kClocks, kLadder };

std::string to_string(SceneKind kind);
SceneKind parse_scene_kind(const std::string& name);

/// All-in-focus ground truth with a per-pixel depth in micrometres.
struct Scene {
  ImageF gt;
  Raster depth_um;
};

/// Maximum defocus blur of the render model, in pixels.
inline constexpr double kSigmaMax = 4.0;
/// Number of uniformly blurred layers the renderer interpolates between.
inline constexpr int kBlurLevels = 9;
/// Fraction of the curve peak that counts as in focus.
inline constexpr double kInFocusFraction = 0.7;

/// Deterministic for a fixed seed. Sides must be >= 64.
///  two_plane: left half at 0 um, right half at 100 um, textured.
///  vessels:   bright curvilinear structures on a dark background, each at a
///             seeded depth in [0, 200] um.
///  clocks:    two clock faces, front at 0 um, back (and backdrop) at 100 um.
///  ladder:    vertical bands at 0, 20, ..., 200 um sharing one texture.
Scene make_scene(SceneKind kind, int width, int height, std::uint64_t seed);

/// sigma(x,y) = kSigmaMax * min(1, |depth - focus| / dof).
double defocus_sigma(double depth_um, double focus_um, double dof_um);

/// Spatially varying Gaussian defocus. Blends between uniformly blurred
/// layers (linear in sigma); the layers are the distinct per-pixel sigmas
/// when there are at most kBlurLevels of them, otherwise a uniform grid on
/// [0, kSigmaMax].
ImageF defocus_render(const Scene& scene, double focus_um, double dof_um);

struct AcquisitionSpec {
  double focus_um = 0.0;
  double dof_um = 120.0;
};

enum class DofFusion { kNone, kMwgf };

struct DofSample {
  double depth_um = 0.0;
  double sharpness = 0.0;
};

/// Edge strength restricted to the pixels at each probe depth, measured on a
/// single acquisition (kNone, exactly one spec) or on the MWGF fusion of all
/// acquisitions (kMwgf, at least two).
std::vector<DofSample> dof_curve(const Scene& scene, std::span<const AcquisitionSpec> acquisitions,
                                 DofFusion fuse, std::span<const double> probe_depths,
                                 const FusionConfig& config = {});

/// Same, on an already rendered or fused image.
std::vector<DofSample> sharpness_profile(const ImageF& img, const Raster& depth_um,
                                         std::span<const double> probe_depths);

/// Number of probe depths whose sharpness is >= fraction * peak.
int in_focus_support(std::span<const DofSample> curve, double fraction = kInFocusFraction);

/// Sorted distinct depths present in the scene.
std::vector<double> distinct_depths(const Raster& depth_um);

/// Seeded generator. The standard distributions are implementation-defined,
/// so the conversions from the mt19937_64 stream are done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform in [0,1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal (Box-Muller).
  double normal();

 private:
  std::mt19937_64 engine_;
};

/// White noise smoothed with a Gaussian of the given scale, with a uniform
/// marginal on [lo, hi].
Raster band_limited_noise(int width, int height, double scale, Rng& rng, double lo, double hi);

}  // namespace mfuse::synth
