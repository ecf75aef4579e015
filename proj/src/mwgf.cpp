#include "mfuse/mwgf.hpp"

#include <cmath>

#include <json.hpp>

#include "mfuse/filters.hpp"
#include "mfuse/morphology.hpp"

namespace mfuse {

std::string to_string(FusionDomain domain) {
  return domain == FusionDomain::kGradient ? "gradient" : "pixel";
}

FusionDomain parse_fusion_domain(const std::string& name) {
  if (name == "pixel") return FusionDomain::kPixel;
  if (name == "gradient") return FusionDomain::kGradient;
  throw Error("unknown fusion domain '" + name + "' (expected pixel or gradient)");
}

void FusionConfig::validate() const {
  check(std::isfinite(sigma_large) && std::isfinite(sigma_small),
        "fusion scales must be finite");
  check(sigma_small > 0.0, "sigma_small must be > 0");
  check(sigma_large > sigma_small, "sigma_large must exceed sigma_small");
  check(close_radius >= 0, "close_radius must be >= 0");
  check(band_radius >= 1, "band_radius must be >= 1");
}

std::string FusionConfig::to_json() const {
  nlohmann::ordered_json j;
  j["sigma_large"] = sigma_large;
  j["sigma_small"] = sigma_small;
  j["close_radius"] = close_radius;
  j["band_radius"] = band_radius;
  j["domain"] = to_string(domain);
  j["tie_break"] = "lowest_index";
  return j.dump(2);
}

FusionConfig FusionConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(std::string("malformed fusion config: ") + e.what());
  }
  check(j.is_object(), "fusion config must be a JSON object");
  FusionConfig cfg;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "sigma_large") {
        cfg.sigma_large = value.get<double>();
      } else if (key == "sigma_small") {
        cfg.sigma_small = value.get<double>();
      } else if (key == "close_radius") {
        cfg.close_radius = value.get<int>();
      } else if (key == "band_radius") {
        cfg.band_radius = value.get<int>();
      } else if (key == "domain") {
        cfg.domain = parse_fusion_domain(value.get<std::string>());
      } else if (key == "tie_break") {
        check(value.get<std::string>() == "lowest_index", "tie_break must be lowest_index");
      } else {
        throw Error("unknown fusion config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("invalid fusion config value: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

double WeightMaps::max_partition_error() const {
  if (maps.empty()) return 1.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < maps.front().size(); ++i) {
    double sum = 0.0;
    for (const auto& m : maps) sum += m[i];
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

Raster focus_saliency(const ImageF& img, double sigma) {
  check(std::isfinite(sigma) && sigma > 0.0, "saliency sigma must be > 0");
  Raster energy = gradient_magnitude(sobel_gradient(img));
  for (double& v : energy.data()) v *= v;
  return gaussian_blur(energy, sigma);
}

std::vector<BitMask> detect_focus_regions(std::span<const Raster> saliencies) {
  check(saliencies.size() >= 2, "focus detection needs at least two sources");
  const Raster& first = saliencies.front();
  for (const auto& s : saliencies)
    check(s.same_shape(first), "saliency maps differ in size");

  std::vector<BitMask> masks(saliencies.size(), BitMask(first.width(), first.height(), 0));
  for (std::size_t i = 0; i < first.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t n = 1; n < saliencies.size(); ++n)
      if (saliencies[n][i] > saliencies[best][i]) best = n;
    masks[best][i] = 1;
  }
  return masks;
}

BitMask refine_region(const BitMask& mask, int close_radius) {
  return fill_holes(largest_component(connected_components(morph_close(mask, close_radius))));
}

namespace {

// Pixels whose clipped (2r+1)^2 window holds both members and non-members.
BitMask boundary_band(const BitMask& mask, int radius) {
  const int w = mask.width();
  const int h = mask.height();
  const std::size_t stride = static_cast<std::size_t>(w) + 1;
  std::vector<int> sat(stride * (static_cast<std::size_t>(h) + 1), 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      sat[(y + 1) * stride + (x + 1)] = (mask(x, y) ? 1 : 0) + sat[y * stride + (x + 1)] +
                                         sat[(y + 1) * stride + x] - sat[y * stride + x];
  BitMask band(w, h, 0);
  for (int y = 0; y < h; ++y) {
    const int y0 = std::max(0, y - radius), y1 = std::min(h - 1, y + radius);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - radius), x1 = std::min(w - 1, x + radius);
      const int count = sat[(y1 + 1) * stride + (x1 + 1)] - sat[y0 * stride + (x1 + 1)] -
                        sat[(y1 + 1) * stride + x0] + sat[y0 * stride + x0];
      const int area = (x1 - x0 + 1) * (y1 - y0 + 1);
      band(x, y) = count > 0 && count < area ? 1 : 0;
    }
  }
  return band;
}

}  // namespace

TriMap build_trimap(std::span<const BitMask> refined, int band_radius) {
  check(refined.size() >= 2, "trimap needs at least two masks");
  check(band_radius >= 1, "band_radius must be >= 1");
  const BitMask& first = refined.front();
  for (const auto& m : refined) check(m.same_shape(first), "refined masks differ in size");

  TriMap tri{Grid<int>(first.width(), first.height(), TriMap::kUnknown),
             static_cast<int>(refined.size())};
  BitMask in_band(first.width(), first.height(), 0);
  for (const auto& m : refined) {
    const BitMask band = boundary_band(m, band_radius);
    for (std::size_t i = 0; i < band.size(); ++i) in_band[i] |= band[i];
  }
  for (std::size_t i = 0; i < in_band.size(); ++i) {
    if (in_band[i]) continue;
    int claimant = TriMap::kUnknown;
    int claims = 0;
    for (std::size_t n = 0; n < refined.size(); ++n) {
      if (refined[n][i]) {
        ++claims;
        claimant = static_cast<int>(n);
      }
    }
    tri.labels[i] = claims == 1 ? claimant : TriMap::kUnknown;
  }
  return tri;
}

WeightMaps compute_weights(const TriMap& trimap, std::span<const Raster> small_saliencies) {
  const int n_src = trimap.n_sources;
  check(n_src >= 2, "weights need at least two sources");
  check(static_cast<int>(small_saliencies.size()) == n_src,
        "saliency count does not match the trimap");
  for (const auto& s : small_saliencies)
    check(s.same_shape(trimap.labels), "saliency size does not match the trimap");

  WeightMaps wm;
  wm.maps.assign(static_cast<std::size_t>(n_src),
                 Raster(trimap.width(), trimap.height(), 0.0));
  const double uniform = 1.0 / n_src;
  for (std::size_t i = 0; i < trimap.labels.size(); ++i) {
    const int label = trimap.labels[i];
    if (label != TriMap::kUnknown) {
      check(label >= 0 && label < n_src, "trimap label out of range");
      wm.maps[static_cast<std::size_t>(label)][i] = 1.0;
      continue;
    }
    double sum = 0.0;
    for (const auto& s : small_saliencies) sum += s[i];
    for (int n = 0; n < n_src; ++n) {
      const auto k = static_cast<std::size_t>(n);
      wm.maps[k][i] = sum < 1e-12 ? uniform : small_saliencies[k][i] / sum;
    }
  }
  return wm;
}

namespace {

// Sobel operator (scaled by 1/8) with replicate borders and its exact adjoint.
struct Tap {
  int dx, dy;
  double w;
};
constexpr Tap kSobelX[6] = {{1, -1, 0.125}, {1, 0, 0.25},   {1, 1, 0.125},
                            {-1, -1, -0.125}, {-1, 0, -0.25}, {-1, 1, -0.125}};
constexpr Tap kSobelY[6] = {{-1, 1, 0.125}, {0, 1, 0.25},   {1, 1, 0.125},
                            {-1, -1, -0.125}, {0, -1, -0.25}, {1, -1, -0.125}};

void apply_forward(const Raster& f, Raster& gx, Raster& gy) {
  const int w = f.width(), h = f.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sx = 0.0, sy = 0.0;
      for (const Tap& t : kSobelX) sx += t.w * f.clamped(x + t.dx, y + t.dy);
      for (const Tap& t : kSobelY) sy += t.w * f.clamped(x + t.dx, y + t.dy);
      gx(x, y) = sx;
      gy(x, y) = sy;
    }
  }
}

void apply_adjoint(const Raster& gx, const Raster& gy, Raster& out) {
  const int w = gx.width(), h = gx.height();
  std::fill(out.data().begin(), out.data().end(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double u = gx(x, y), v = gy(x, y);
      for (const Tap& t : kSobelX)
        out(std::clamp(x + t.dx, 0, w - 1), std::clamp(y + t.dy, 0, h - 1)) += t.w * u;
      for (const Tap& t : kSobelY)
        out(std::clamp(x + t.dx, 0, w - 1), std::clamp(y + t.dy, 0, h - 1)) += t.w * v;
    }
  }
}

double dot(const Raster& a, const Raster& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

ImageF reconstruct_from_gradients(const GradientField& g, double anchor_mean,
                                  const ReconstructOptions& options, ReconstructStats* stats) {
  check(g.gx.same_shape(g.gy) && !g.gx.empty(), "gradient components differ in size");
  for (std::size_t i = 0; i < g.gx.size(); ++i)
    check(std::isfinite(g.gx[i]) && std::isfinite(g.gy[i]), "gradient field is not finite");
  check(std::isfinite(anchor_mean), "anchor mean must be finite");
  const int w = g.gx.width(), h = g.gx.height();

  // Conjugate gradients on the normal equations S^T S f = S^T g, started at
  // zero so the iterate stays orthogonal to the constant null space.
  Raster b(w, h);
  apply_adjoint(g.gx, g.gy, b);
  Raster f(w, h, 0.0);
  Raster r = b;
  Raster p = r;
  Raster ap(w, h), tx(w, h), ty(w, h);
  const double b_norm = std::sqrt(dot(b, b));
  double rr = dot(r, r);
  int it = 0;
  double rel = b_norm > 0.0 ? std::sqrt(rr) / b_norm : 0.0;
  while (b_norm > 0.0 && rel > options.relative_tolerance && it < options.max_iterations) {
    apply_forward(p, tx, ty);
    apply_adjoint(tx, ty, ap);
    const double pap = dot(p, ap);
    if (pap <= 0.0) break;
    const double alpha = rr / pap;
    for (std::size_t i = 0; i < f.size(); ++i) {
      f[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    const double rr_next = dot(r, r);
    const double beta = rr_next / rr;
    rr = rr_next;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
    ++it;
    rel = std::sqrt(rr) / b_norm;
  }
  if (stats != nullptr) *stats = {it, rel};

  const double shift = anchor_mean - mean(f.data());
  for (double& v : f.data()) v += shift;
  return ImageF::clamped(std::move(f));
}

ImageF fuse_weighted(std::span<const ImageF> images, const WeightMaps& weights,
                     FusionDomain domain) {
  check(images.size() >= 1, "nothing to fuse");
  check(weights.maps.size() == images.size(), "weight map count does not match sources");
  const ImageF& first = images.front();
  for (const auto& img : images) check(img.same_shape(first), "source images differ in size");
  for (const auto& m : weights.maps) check(m.same_shape(first.raster()), "weight map size mismatch");

  const int w = first.width(), h = first.height();
  if (domain == FusionDomain::kPixel) {
    Raster out(w, h, 0.0);
    for (std::size_t n = 0; n < images.size(); ++n)
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += weights.maps[n][i] * images[n][i];
    return ImageF::clamped(std::move(out));
  }

  GradientField fused{Raster(w, h, 0.0), Raster(w, h, 0.0)};
  double anchor = 0.0;
  for (std::size_t n = 0; n < images.size(); ++n) {
    const GradientField g = sobel_gradient(images[n]);
    const Raster& wn = weights.maps[n];
    double weighted_sum = 0.0;
    for (std::size_t i = 0; i < wn.size(); ++i) {
      fused.gx[i] += wn[i] * g.gx[i];
      fused.gy[i] += wn[i] * g.gy[i];
      weighted_sum += wn[i] * images[n][i];
    }
    anchor += weighted_sum / static_cast<double>(wn.size());
  }
  return reconstruct_from_gradients(fused, anchor);
}

FusionResult mwgf_fuse(std::span<const ImageF> images, const FusionConfig& config) {
  config.validate();
  check(images.size() >= 2, "fusion needs at least two source images");
  const ImageF& first = images.front();
  for (const auto& img : images)
    check(img.same_shape(first), "source images differ in size: " +
                                     std::to_string(first.width()) + "x" +
                                     std::to_string(first.height()) + " vs " +
                                     std::to_string(img.width()) + "x" +
                                     std::to_string(img.height()));
  const int min_side = 4 * config.band_radius;
  check(first.width() >= min_side && first.height() >= min_side,
        "source images must be at least " + std::to_string(min_side) +
            " pixels on a side for band_radius " + std::to_string(config.band_radius));

  FusionResult res;
  for (const auto& img : images) res.saliency_large.push_back(focus_saliency(img, config.sigma_large));
  res.initial_regions = detect_focus_regions(res.saliency_large);
  for (const auto& m : res.initial_regions)
    res.refined_regions.push_back(refine_region(m, config.close_radius));
  res.trimap = build_trimap(res.refined_regions, config.band_radius);
  for (const auto& img : images) res.saliency_small.push_back(focus_saliency(img, config.sigma_small));
  res.weights = compute_weights(res.trimap, res.saliency_small);
  res.fused = fuse_weighted(images, res.weights, config.domain);
  return res;
}

}  // namespace mfuse
