#include "mfuse/synth.hpp"

#include <cmath>
#include <numbers>
#include <queue>
#include <set>
#include <sstream>

#include "mfuse/filters.hpp"
#include "mfuse/metrics.hpp"

namespace mfuse::synth {

std::string to_string(SceneKind kind) {
  switch (kind) {
    case SceneKind::kTwoPlane: return "two_plane";
    case SceneKind::kVessels: return "vessels";
    case SceneKind::kClocks: return "clocks";
    case SceneKind::kLadder: return "ladder";
  }
  return "unknown";
}

SceneKind parse_scene_kind(const std::string& name) {
  for (auto k : {SceneKind::kTwoPlane, SceneKind::kVessels, SceneKind::kClocks, SceneKind::kLadder})
    if (to_string(k) == name) return k;
  throw Error("unknown scene kind '" + name + "'");
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  const double u1 = 1.0 - uniform();  // (0,1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Raster band_limited_noise(int width, int height, double scale, Rng& rng, double lo, double hi) {
  Raster noise(width, height);
  for (double& v : noise.data()) v = rng.normal();
  noise = gaussian_blur(noise, scale);
  // Standardize and push through the normal CDF: the marginal becomes
  // uniform on [lo, hi], so the texture fills its whole intensity range.
  const double m = mean(noise.data());
  double var = 0.0;
  for (double v : noise.data()) var += (v - m) * (v - m);
  const double sd = std::sqrt(var / static_cast<double>(noise.size()));
  for (double& v : noise.data()) {
    const double u = sd > 0.0 ? 0.5 * std::erfc(-(v - m) / (sd * std::numbers::sqrt2)) : 0.5;
    v = lo + (hi - lo) * u;
  }
  return noise;
}

namespace {

// Correlation length of scene textures, in pixels. Sets how quickly the
// edge-strength of a texture decays under defocus blur.
constexpr double kTextureScale = 3.0;

// Anti-aliased coverage from a signed distance (negative inside).
double coverage(double signed_distance) { return std::clamp(0.5 - signed_distance, 0.0, 1.0); }

double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
  const double vx = bx - ax, vy = by - ay;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - (ax + t * vx), py - (ay + t * vy));
}

void blend(Raster& img, int x, int y, double value, double alpha) {
  img(x, y) = img(x, y) * (1.0 - alpha) + value * alpha;
}

// Paints value + grain so drawn strokes are textured rather than flat.
void blend(Raster& img, const Raster& grain, int x, int y, double value, double alpha) {
  blend(img, x, y, std::clamp(value + grain(x, y), 0.0, 1.0), alpha);
}

void draw_segment(Raster& img, double ax, double ay, double bx, double by, double half_width,
                  double value, const Raster* grain = nullptr) {
  const int x0 = std::max(0, static_cast<int>(std::floor(std::min(ax, bx) - half_width - 1)));
  const int x1 = std::min(img.width() - 1, static_cast<int>(std::ceil(std::max(ax, bx) + half_width + 1)));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::min(ay, by) - half_width - 1)));
  const int y1 = std::min(img.height() - 1, static_cast<int>(std::ceil(std::max(ay, by) + half_width + 1)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double a = coverage(segment_distance(x, y, ax, ay, bx, by) - half_width);
      if (a <= 0.0) continue;
      if (grain != nullptr)
        blend(img, *grain, x, y, value, a);
      else
        blend(img, x, y, value, a);
    }
}

// Texture plus a handful of straight line structures, in [0.05, 0.95].
Raster textured_field(int width, int height, Rng& rng) {
  Raster img = band_limited_noise(width, height, kTextureScale, rng, 0.15, 0.85);
  const int lines = std::max(4, (width + height) / 64);
  for (int i = 0; i < lines; ++i) {
    const double ax = rng.uniform(0, width), ay = rng.uniform(0, height);
    const double angle = rng.uniform(0, std::numbers::pi);
    const double len = rng.uniform(0.2, 0.5) * std::min(width, height);
    draw_segment(img, ax, ay, ax + len * std::cos(angle), ay + len * std::sin(angle),
                 rng.uniform(0.6, 1.5), rng.uniform() < 0.5 ? 0.05 : 0.95);
  }
  return img;
}

// Mirrors the left part of a field into the rest so that every depth
// region carries statistically identical structure.
Raster tile_columns(const Raster& field, int tile_width) {
  Raster out(field.width(), field.height());
  for (int y = 0; y < field.height(); ++y)
    for (int x = 0; x < field.width(); ++x) {
      const int tile = x / tile_width;
      const int offset = x % tile_width;
      const int sx = tile % 2 == 0 ? offset : tile_width - 1 - offset;
      out(x, y) = field(std::min(sx, field.width() - 1), y);
    }
  return out;
}

Scene two_plane(int width, int height, Rng& rng) {
  const int half = width / 2;
  Raster depth(width, height, 0.0);
  for (int y = 0; y < height; ++y)
    for (int x = half; x < width; ++x) depth(x, y) = 100.0;
  const Raster field = tile_columns(textured_field(width, height, rng), half);
  return {ImageF::clamped(field), std::move(depth)};
}

Scene ladder(int width, int height, Rng& rng) {
  constexpr int kSteps = 11;
  const int band = width / kSteps;
  Raster depth(width, height, 0.0);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) depth(x, y) = 20.0 * std::min(kSteps - 1, x / band);
  const Raster field =
      tile_columns(band_limited_noise(width, height, kTextureScale, rng, 0.05, 0.95), band);
  return {ImageF::clamped(field), std::move(depth)};
}

Scene vessels(int width, int height, Rng& rng) {
  const int count = std::max(6, width * height / 4096);
  Raster background = band_limited_noise(width, height, kTextureScale, rng, 0.02, 0.10);
  Raster response(width, height, 0.0);
  Grid<int> owner(width, height, -1);
  std::vector<double> depths;

  for (int s = 0; s < count; ++s) {
    const double sd = rng.uniform(0.0, 200.0);
    depths.push_back(sd);
    const double tube = rng.uniform(0.8, 2.0);
    const double peak = rng.uniform(0.55, 1.0);
    double x = rng.uniform(0, width), y = rng.uniform(0, height);
    double heading = rng.uniform(0, 2.0 * std::numbers::pi);
    double turn = 0.0;
    const int steps = static_cast<int>(rng.uniform(0.4, 1.0) * std::min(width, height) * 2.0);
    const int reach = static_cast<int>(std::ceil(3.0 * tube));
    for (int k = 0; k < steps; ++k) {
      turn = 0.9 * turn + 0.04 * rng.normal();
      heading += turn;
      x += 0.5 * std::cos(heading);
      y += 0.5 * std::sin(heading);
      if (x < -reach || y < -reach || x > width + reach || y > height + reach) break;
      const int cx = static_cast<int>(std::lround(x)), cy = static_cast<int>(std::lround(y));
      for (int py = cy - reach; py <= cy + reach; ++py) {
        for (int px = cx - reach; px <= cx + reach; ++px) {
          if (!response.contains(px, py)) continue;
          const double d2 = (px - x) * (px - x) + (py - y) * (py - y);
          const double v = peak * std::exp(-d2 / (2.0 * tube * tube));
          if (v > response(px, py)) {
            response(px, py) = v;
            if (v > 0.5 * peak) owner(px, py) = s;
          }
        }
      }
    }
  }

  // Every pixel takes the depth of the nearest vessel core (8-connected BFS).
  std::queue<std::pair<int, int>> frontier;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      if (owner(x, y) >= 0) frontier.emplace(x, y);
  if (frontier.empty()) {
    owner(width / 2, height / 2) = 0;
    frontier.emplace(width / 2, height / 2);
  }
  while (!frontier.empty()) {
    const auto [x, y] = frontier.front();
    frontier.pop();
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx, ny = y + dy;
        if (owner.contains(nx, ny) && owner(nx, ny) < 0) {
          owner(nx, ny) = owner(x, y);
          frontier.emplace(nx, ny);
        }
      }
  }

  Raster gt(width, height);
  Raster depth(width, height);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    gt[i] = std::max(background[i], response[i]);
    depth[i] = depths[static_cast<std::size_t>(owner[i])];
  }
  return {ImageF::clamped(std::move(gt)), std::move(depth)};
}

// Clock face with rim, tick marks, two hands and a hub. Every stroke carries
// fine grain so the scene has no flat tones.
void draw_clock(Raster& img, double cx, double cy, double r, Rng& rng) {
  const int w = img.width(), h = img.height();
  const Raster face = band_limited_noise(w, h, kTextureScale, rng, 0.3, 1.0);
  const Raster grain = band_limited_noise(w, h, 1.0, rng, -0.08, 0.08);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double a = coverage(std::hypot(x - cx, y - cy) - r);
      if (a > 0.0) blend(img, x, y, face(x, y), a);
    }
  const double rim = 0.05 * r;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double a = coverage(std::abs(std::hypot(x - cx, y - cy) - (r - rim)) - rim);
      if (a > 0.0) blend(img, grain, x, y, 0.15, a);
    }
  for (int t = 0; t < 60; ++t) {
    const double ang = t * std::numbers::pi / 30.0;
    const bool hour = t % 5 == 0;
    const double inner = (hour ? 0.74 : 0.84) * r, outer = 0.9 * r;
    draw_segment(img, cx + inner * std::cos(ang), cy + inner * std::sin(ang),
                 cx + outer * std::cos(ang), cy + outer * std::sin(ang),
                 hour ? std::max(0.8, 0.018 * r) : 0.5, 0.12, &grain);
  }
  const double hour_angle = rng.uniform(0, 2.0 * std::numbers::pi);
  const double minute_angle = rng.uniform(0, 2.0 * std::numbers::pi);
  draw_segment(img, cx, cy, cx + 0.5 * r * std::cos(hour_angle), cy + 0.5 * r * std::sin(hour_angle),
               std::max(1.0, 0.03 * r), 0.1, &grain);
  draw_segment(img, cx, cy, cx + 0.78 * r * std::cos(minute_angle),
               cy + 0.78 * r * std::sin(minute_angle), std::max(0.7, 0.02 * r), 0.1, &grain);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double a = coverage(std::hypot(x - cx, y - cy) - std::max(1.5, 0.05 * r));
      if (a > 0.0) blend(img, grain, x, y, 0.3, a);
    }
}

Scene clocks(int width, int height, Rng& rng) {
  const double m = std::min(width, height);
  Raster img = band_limited_noise(width, height, kTextureScale, rng, 0.0, 0.7);
  const double back_x = 0.70 * width, back_y = 0.40 * height, back_r = 0.26 * m;
  const double front_x = 0.34 * width, front_y = 0.58 * height, front_r = 0.32 * m;
  draw_clock(img, back_x, back_y, back_r, rng);
  draw_clock(img, front_x, front_y, front_r, rng);
  Raster depth(width, height, 100.0);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      if (std::hypot(x - front_x, y - front_y) <= front_r + 0.5) depth(x, y) = 0.0;
  return {ImageF::clamped(std::move(img)), std::move(depth)};
}

}  // namespace

Scene make_scene(SceneKind kind, int width, int height, std::uint64_t seed) {
  check(width >= 64 && height >= 64, "synthetic scenes need at least 64x64 pixels");
  Rng rng(seed);
  switch (kind) {
    case SceneKind::kTwoPlane: return two_plane(width, height, rng);
    case SceneKind::kVessels: return vessels(width, height, rng);
    case SceneKind::kClocks: return clocks(width, height, rng);
    case SceneKind::kLadder: return ladder(width, height, rng);
  }
  throw Error("unhandled scene kind");
}

double defocus_sigma(double depth_um, double focus_um, double dof_um) {
  return kSigmaMax * std::min(1.0, std::abs(depth_um - focus_um) / dof_um);
}

ImageF defocus_render(const Scene& scene, double focus_um, double dof_um) {
  check(dof_um > 0.0, "depth of field must be > 0");
  check(std::isfinite(focus_um), "focus depth must be finite");
  check(scene.gt.same_shape(scene.depth_um), "scene depth map does not match the image");

  Raster sigma(scene.gt.width(), scene.gt.height());
  std::set<double> distinct;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    sigma[i] = defocus_sigma(scene.depth_um[i], focus_um, dof_um);
    if (distinct.size() <= static_cast<std::size_t>(kBlurLevels)) distinct.insert(sigma[i]);
  }
  std::vector<double> levels;
  if (distinct.size() <= static_cast<std::size_t>(kBlurLevels)) {
    levels.assign(distinct.begin(), distinct.end());
  } else {
    for (int k = 0; k < kBlurLevels; ++k) levels.push_back(kSigmaMax * k / (kBlurLevels - 1));
  }
  if (levels.size() == 1 && levels.front() == 0.0) return scene.gt;

  std::vector<Raster> layers;
  for (double s : levels) layers.push_back(gaussian_blur(scene.gt.raster(), s));

  Raster out(sigma.width(), sigma.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double s = sigma[i];
    const auto hi_it = std::lower_bound(levels.begin(), levels.end(), s);
    if (hi_it == levels.end()) {
      out[i] = layers.back()[i];
      continue;
    }
    const auto hi = static_cast<std::size_t>(hi_it - levels.begin());
    if (*hi_it == s || hi == 0) {
      out[i] = layers[hi][i];
      continue;
    }
    const double f = (s - levels[hi - 1]) / (levels[hi] - levels[hi - 1]);
    out[i] = (1.0 - f) * layers[hi - 1][i] + f * layers[hi][i];
  }
  return ImageF::clamped(std::move(out));
}

std::vector<DofSample> sharpness_profile(const ImageF& img, const Raster& depth_um,
                                         std::span<const double> probe_depths) {
  check(!probe_depths.empty(), "probe depth list is empty");
  check(img.same_shape(depth_um), "depth map does not match the image");
  const Raster mag = gradient_magnitude(sobel_gradient(img));
  std::vector<DofSample> curve;
  for (double probe : probe_depths) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < mag.size(); ++i) {
      if (std::abs(depth_um[i] - probe) <= 1e-9) {
        sum += mag[i];
        ++n;
      }
    }
    if (n == 0) {
      std::ostringstream msg;
      msg << "no scene pixels at probe depth " << probe << " um";
      throw Error(msg.str());
    }
    curve.push_back({probe, 255.0 * sum / static_cast<double>(n)});
  }
  return curve;
}

std::vector<DofSample> dof_curve(const Scene& scene, std::span<const AcquisitionSpec> acquisitions,
                                 DofFusion fuse, std::span<const double> probe_depths,
                                 const FusionConfig& config) {
  check(!probe_depths.empty(), "probe depth list is empty");
  // Validate every probe before rendering anything.
  sharpness_profile(scene.gt, scene.depth_um, probe_depths);
  if (fuse == DofFusion::kNone) {
    check(acquisitions.size() == 1, "an unfused curve takes exactly one acquisition");
    const auto& a = acquisitions.front();
    return sharpness_profile(defocus_render(scene, a.focus_um, a.dof_um), scene.depth_um,
                             probe_depths);
  }
  check(acquisitions.size() >= 2, "a fused curve needs at least two acquisitions");
  std::vector<ImageF> renders;
  for (const auto& a : acquisitions) renders.push_back(defocus_render(scene, a.focus_um, a.dof_um));
  const FusionResult fused = mwgf_fuse(renders, config);
  return sharpness_profile(fused.fused, scene.depth_um, probe_depths);
}

int in_focus_support(std::span<const DofSample> curve, double fraction) {
  if (curve.empty()) return 0;
  double peak = 0.0;
  for (const auto& s : curve) peak = std::max(peak, s.sharpness);
  int n = 0;
  for (const auto& s : curve)
    if (s.sharpness >= fraction * peak) ++n;
  return n;
}

std::vector<double> distinct_depths(const Raster& depth_um) {
  std::set<double> d(depth_um.data().begin(), depth_um.data().end());
  return {d.begin(), d.end()};
}

}  // namespace mfuse::synth
