#include "mfuse/baselines.hpp"

#include <cmath>

#include "mfuse/filters.hpp"

namespace mfuse {

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kAverage: return "average";
    case BaselineKind::kLap: return "lap";
    case BaselineKind::kDwt: return "dwt";
    case BaselineKind::kPca: return "pca";
    case BaselineKind::kGra: return "gra";
    case BaselineKind::kFsd: return "fsd";
  }
  return "unknown";
}

BaselineKind parse_baseline_kind(const std::string& name) {
  for (auto k : {BaselineKind::kAverage, BaselineKind::kLap, BaselineKind::kDwt,
                 BaselineKind::kPca, BaselineKind::kGra, BaselineKind::kFsd})
    if (to_string(k) == name) return k;
  throw Error("unknown baseline method '" + name + "'");
}

namespace pyramid {
namespace {

const std::vector<double> kBinomial5 = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};

Raster filter5(const Raster& img) { return convolve_separable(img, kBinomial5, kBinomial5); }

// Adjoint of a centered 1D replicate-border convolution along one axis.
Raster convolve_adjoint_axis(const Raster& img, const std::vector<double>& taps, bool along_x) {
  const int w = img.width(), h = img.height();
  const int r = static_cast<int>(taps.size() / 2);
  Raster out(w, h, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double v = img(x, y);
      for (int k = -r; k <= r; ++k) {
        const double t = taps[static_cast<std::size_t>(k + r)];
        if (along_x)
          out(std::clamp(x + k, 0, w - 1), y) += t * v;
        else
          out(x, std::clamp(y + k, 0, h - 1)) += t * v;
      }
    }
  }
  return out;
}

Raster filter5_adjoint(const Raster& img) {
  return convolve_adjoint_axis(convolve_adjoint_axis(img, kBinomial5, false), kBinomial5, true);
}

Raster decimate(const Raster& img) {
  Raster out(img.width() / 2, img.height() / 2);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) out(x, y) = img(2 * x, 2 * y);
  return out;
}

// Expansion along one axis: even outputs (g[i-1] + 6 g[i] + g[i+1]) / 8,
// odd outputs (g[i] + g[i+1]) / 2, replicate borders.
double expand_even(double l, double c, double r) { return (l + 6.0 * c + r) / 8.0; }
double expand_odd(double c, double r) { return (c + r) / 2.0; }

double dot(const Raster& a, const Raster& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

Raster reduce(const Raster& img) {
  check(img.width() % 2 == 0 && img.height() % 2 == 0, "reduce needs even dimensions");
  return decimate(filter5(img));
}

Raster expand(const Raster& img, int width, int height) {
  check(width == 2 * img.width() && height == 2 * img.height(), "expand size mismatch");
  Raster horiz(width, img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < width; ++x) {
      const int i = x / 2;
      horiz(x, y) = x % 2 == 0
                        ? expand_even(img.clamped(i - 1, y), img(i, y), img.clamped(i + 1, y))
                        : expand_odd(img(i, y), img.clamped(i + 1, y));
    }
  }
  Raster out(width, height);
  for (int y = 0; y < height; ++y) {
    const int j = y / 2;
    for (int x = 0; x < width; ++x) {
      out(x, y) = y % 2 == 0 ? expand_even(horiz.clamped(x, j - 1), horiz(x, j),
                                           horiz.clamped(x, j + 1))
                             : expand_odd(horiz(x, j), horiz.clamped(x, j + 1));
    }
  }
  return out;
}

std::vector<Raster> laplacian_decompose(const Raster& img, int levels) {
  std::vector<Raster> pyr;
  Raster current = img;
  for (int k = 0; k < levels; ++k) {
    Raster next = reduce(current);
    Raster up = expand(next, current.width(), current.height());
    for (std::size_t i = 0; i < up.size(); ++i) up[i] = current[i] - up[i];
    pyr.push_back(std::move(up));
    current = std::move(next);
  }
  pyr.push_back(std::move(current));
  return pyr;
}

Raster laplacian_reconstruct(const std::vector<Raster>& pyr) {
  check(!pyr.empty(), "empty pyramid");
  Raster current = pyr.back();
  for (auto it = pyr.rbegin() + 1; it != pyr.rend(); ++it) {
    Raster up = expand(current, it->width(), it->height());
    for (std::size_t i = 0; i < up.size(); ++i) up[i] += (*it)[i];
    current = std::move(up);
  }
  return current;
}

std::vector<Raster> fsd_decompose(const Raster& img, int levels) {
  std::vector<Raster> pyr;
  Raster current = img;
  for (int k = 0; k < levels; ++k) {
    check(current.width() % 2 == 0 && current.height() % 2 == 0, "fsd needs even dimensions");
    Raster filtered = filter5(current);
    Raster detail(current.width(), current.height());
    for (std::size_t i = 0; i < detail.size(); ++i) detail[i] = current[i] - filtered[i];
    pyr.push_back(std::move(detail));
    current = decimate(filtered);
  }
  pyr.push_back(std::move(current));
  return pyr;
}

namespace {

// Recovers level G from its FSD detail L = G - F(G) and the decimated
// filtered level C = D(F(G)). With B = F(G): (I - F) B = F(L) and D B = C.
// Solved in the least-squares sense by CG on the normal equations; for an
// unmodified pyramid the system is consistent and the solution exact.
Raster fsd_level_inverse(const Raster& detail, const Raster& coarse) {
  const int w = detail.width(), h = detail.height();
  auto hp = [](const Raster& x) {  // (I - F) x
    Raster fx = filter5(x);
    for (std::size_t i = 0; i < fx.size(); ++i) fx[i] = x[i] - fx[i];
    return fx;
  };
  auto hp_adjoint = [](const Raster& x) {
    Raster fx = filter5_adjoint(x);
    for (std::size_t i = 0; i < fx.size(); ++i) fx[i] = x[i] - fx[i];
    return fx;
  };
  auto normal = [&](const Raster& x) {
    Raster out = hp_adjoint(hp(x));
    for (int y = 0; y < h; y += 2)
      for (int xx = 0; xx < w; xx += 2) out(xx, y) += x(xx, y);
    return out;
  };

  Raster rhs = hp_adjoint(filter5(detail));
  for (int y = 0; y < h; y += 2)
    for (int x = 0; x < w; x += 2) rhs(x, y) += coarse(x / 2, y / 2);

  Raster b = expand(coarse, w, h);
  Raster nb = normal(b);
  Raster r(w, h);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - nb[i];
  Raster p = r;
  const double rhs_norm = std::sqrt(dot(rhs, rhs));
  double rr = dot(r, r);
  for (int it = 0; it < 5000 && rhs_norm > 0.0 && std::sqrt(rr) > 1e-14 * rhs_norm; ++it) {
    const Raster ap = normal(p);
    const double pap = dot(p, ap);
    if (pap <= 0.0) break;
    const double alpha = rr / pap;
    for (std::size_t i = 0; i < b.size(); ++i) {
      b[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    const double rr_next = dot(r, r);
    const double beta = rr_next / rr;
    rr = rr_next;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
  }
  for (std::size_t i = 0; i < b.size(); ++i) b[i] += detail[i];
  return b;
}

}  // namespace

Raster fsd_reconstruct(const std::vector<Raster>& pyr) {
  check(!pyr.empty(), "empty pyramid");
  Raster current = pyr.back();
  for (auto it = pyr.rbegin() + 1; it != pyr.rend(); ++it)
    current = fsd_level_inverse(*it, current);
  return current;
}

HaarCoefficients haar_decompose(const Raster& img, int levels) {
  HaarCoefficients c;
  Raster a = img;
  for (int k = 0; k < levels; ++k) {
    check(a.width() % 2 == 0 && a.height() % 2 == 0, "haar needs even dimensions");
    const int w = a.width() / 2, h = a.height() / 2;
    Raster ll(w, h), lh(w, h), hl(w, h), hh(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double p = a(2 * x, 2 * y), q = a(2 * x + 1, 2 * y);
        const double r = a(2 * x, 2 * y + 1), s = a(2 * x + 1, 2 * y + 1);
        ll(x, y) = (p + q + r + s) / 2.0;
        lh(x, y) = (p - q + r - s) / 2.0;
        hl(x, y) = (p + q - r - s) / 2.0;
        hh(x, y) = (p - q - r + s) / 2.0;
      }
    }
    c.details.push_back({std::move(lh), std::move(hl), std::move(hh)});
    a = std::move(ll);
  }
  c.approximation = std::move(a);
  return c;
}

Raster haar_reconstruct(const HaarCoefficients& coeffs) {
  Raster a = coeffs.approximation;
  for (auto it = coeffs.details.rbegin(); it != coeffs.details.rend(); ++it) {
    const auto& [lh, hl, hh] = *it;
    check(lh.same_shape(a), "haar band size mismatch");
    Raster out(2 * a.width(), 2 * a.height());
    for (int y = 0; y < a.height(); ++y) {
      for (int x = 0; x < a.width(); ++x) {
        const double ll = a(x, y), d1 = lh(x, y), d2 = hl(x, y), d3 = hh(x, y);
        out(2 * x, 2 * y) = (ll + d1 + d2 + d3) / 2.0;
        out(2 * x + 1, 2 * y) = (ll - d1 + d2 - d3) / 2.0;
        out(2 * x, 2 * y + 1) = (ll + d1 - d2 - d3) / 2.0;
        out(2 * x + 1, 2 * y + 1) = (ll - d1 - d2 + d3) / 2.0;
      }
    }
    a = std::move(out);
  }
  return a;
}

}  // namespace pyramid

namespace {

Raster pad_replicate(const Raster& img, int width, int height) {
  Raster out(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) out(x, y) = img.clamped(x, y);
  return out;
}

Raster crop(const Raster& img, int width, int height) {
  Raster out(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) out(x, y) = img(x, y);
  return out;
}

// Max-absolute selection; ties keep the first input.
Raster select_max_abs(const Raster& a, const Raster& b) {
  Raster out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::abs(b[i]) > std::abs(a[i]) ? b[i] : a[i];
  return out;
}

Raster average(const Raster& a, const Raster& b) {
  Raster out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = 0.5 * (a[i] + b[i]);
  return out;
}

// Sum of absolute responses to horizontal, vertical and both diagonal
// first differences (diagonals scaled by 1/sqrt 2).
Raster directional_activity(const Raster& g) {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Raster out(g.width(), g.height());
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      const double c = g(x, y);
      out(x, y) = std::abs(g.clamped(x + 1, y) - c) + std::abs(g.clamped(x, y + 1) - c) +
                  inv_sqrt2 * std::abs(g.clamped(x + 1, y + 1) - c) +
                  inv_sqrt2 * std::abs(g.clamped(x - 1, y + 1) - c);
    }
  }
  return out;
}

Raster fuse_lap(const Raster& a, const Raster& b, int levels) {
  auto pa = pyramid::laplacian_decompose(a, levels);
  const auto pb = pyramid::laplacian_decompose(b, levels);
  for (int k = 0; k < levels; ++k) pa[k] = select_max_abs(pa[k], pb[k]);
  pa.back() = average(pa.back(), pb.back());
  return pyramid::laplacian_reconstruct(pa);
}

Raster fuse_gra(const Raster& a, const Raster& b, int levels) {
  auto pa = pyramid::laplacian_decompose(a, levels);
  const auto pb = pyramid::laplacian_decompose(b, levels);
  Raster ga = a, gb = b;
  for (int k = 0; k < levels; ++k) {
    const Raster act_a = directional_activity(ga);
    const Raster act_b = directional_activity(gb);
    for (std::size_t i = 0; i < pa[k].size(); ++i)
      if (act_b[i] > act_a[i]) pa[k][i] = pb[k][i];
    ga = pyramid::reduce(ga);
    gb = pyramid::reduce(gb);
  }
  pa.back() = average(pa.back(), pb.back());
  return pyramid::laplacian_reconstruct(pa);
}

Raster fuse_fsd(const Raster& a, const Raster& b, int levels) {
  auto pa = pyramid::fsd_decompose(a, levels);
  const auto pb = pyramid::fsd_decompose(b, levels);
  for (int k = 0; k < levels; ++k) pa[k] = select_max_abs(pa[k], pb[k]);
  pa.back() = average(pa.back(), pb.back());
  return pyramid::fsd_reconstruct(pa);
}

Raster fuse_dwt(const Raster& a, const Raster& b, int levels) {
  auto ca = pyramid::haar_decompose(a, levels);
  const auto cb = pyramid::haar_decompose(b, levels);
  for (std::size_t k = 0; k < ca.details.size(); ++k)
    for (int band = 0; band < 3; ++band)
      ca.details[k][band] = select_max_abs(ca.details[k][band], cb.details[k][band]);
  ca.approximation = average(ca.approximation, cb.approximation);
  return pyramid::haar_reconstruct(ca);
}

}  // namespace

std::array<double, 2> pca_weights(const ImageF& a, const ImageF& b) {
  check(a.same_shape(b), "pca inputs differ in size");
  const double ma = mean(a.samples()), mb = mean(b.samples());
  double va = 0.0, vb = 0.0, cov = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    va += da * da;
    vb += db * db;
    cov += da * db;
  }
  const auto n = static_cast<double>(a.size());
  va /= n;
  vb /= n;
  cov /= n;

  constexpr std::array<double, 2> kEqual = {0.5, 0.5};
  constexpr double kTiny = 1e-15;
  if (va < kTiny || vb < kTiny) return kEqual;
  if (std::abs(cov) / std::sqrt(va * vb) >= 1.0 - 1e-12) return kEqual;

  // Principal eigenvector of [[va, cov], [cov, vb]].
  const double half_diff = 0.5 * (va - vb);
  const double disc = std::sqrt(half_diff * half_diff + cov * cov);
  if (disc < kTiny) return kEqual;
  const double lambda = 0.5 * (va + vb) + disc;
  double ea, eb;
  if (va >= vb) {
    ea = lambda - vb;
    eb = cov;
  } else {
    ea = cov;
    eb = lambda - va;
  }
  ea = std::abs(ea);
  eb = std::abs(eb);
  const double sum = ea + eb;
  if (sum < kTiny) return kEqual;
  return {ea / sum, eb / sum};
}

ImageF baseline_fuse(const ImageF& a, const ImageF& b, const BaselineMethod& method) {
  check(a.same_shape(b), "baseline inputs differ in size");
  const int w = a.width(), h = a.height();

  if (method.kind == BaselineKind::kAverage) return ImageF::clamped(average(a.raster(), b.raster()));
  if (method.kind == BaselineKind::kPca) {
    const auto [wa, wb] = pca_weights(a, b);
    Raster out(w, h);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = wa * a[i] + wb * b[i];
    return ImageF::clamped(std::move(out));
  }

  check(method.levels >= 1, "transform levels must be >= 1");
  const int max_levels = static_cast<int>(std::floor(std::log2(std::min(w, h))));
  check(method.levels <= max_levels,
        "transform depth " + std::to_string(method.levels) + " too deep for a " +
            std::to_string(w) + "x" + std::to_string(h) + " image (max " +
            std::to_string(max_levels) + ")");

  const int block = 1 << method.levels;
  const int pw = (w + block - 1) / block * block;
  const int ph = (h + block - 1) / block * block;
  const Raster pa = pad_replicate(a.raster(), pw, ph);
  const Raster pb = pad_replicate(b.raster(), pw, ph);

  Raster fused;
  switch (method.kind) {
    case BaselineKind::kLap: fused = fuse_lap(pa, pb, method.levels); break;
    case BaselineKind::kGra: fused = fuse_gra(pa, pb, method.levels); break;
    case BaselineKind::kFsd: fused = fuse_fsd(pa, pb, method.levels); break;
    case BaselineKind::kDwt: fused = fuse_dwt(pa, pb, method.levels); break;
    default: throw Error("unhandled baseline method");
  }
  return ImageF::clamped(crop(fused, w, h));
}

}  // namespace mfuse
