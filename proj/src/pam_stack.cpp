#include "mfuse/pam_stack.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mfuse {

namespace fs = std::filesystem;

Volume::Volume(int nx, int ny, int nz, double dz_um, std::vector<float> amplitudes)
    : nx_(nx), ny_(ny), nz_(nz), dz_um_(dz_um), amplitudes_(std::move(amplitudes)) {
  check(nx >= 1 && ny >= 1 && nz >= 1, "volume dimensions must be >= 1");
  check(std::isfinite(dz_um) && dz_um > 0.0, "volume dz must be > 0");
  check(amplitudes_.size() ==
            static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz),
        "volume amplitude count does not match nx*ny*nz");
  for (float a : amplitudes_)
    check(std::isfinite(a) && a >= 0.0f, "volume amplitudes must be finite and >= 0");
}

Raster Volume::slice(int z) const {
  check(z >= 0 && z < nz_, "slice index out of range");
  Raster r(nx_, ny_);
  for (int y = 0; y < ny_; ++y)
    for (int x = 0; x < nx_; ++x) r(x, y) = (*this)(x, y, z);
  return r;
}

StackManifest StackManifest::read(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  check(in.good(), "cannot open manifest: " + manifest_path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("malformed manifest '" + manifest_path.string() + "': " + e.what());
  }
  check(j.is_object(), "manifest must be a JSON object");
  const fs::path base = manifest_path.parent_path();
  StackManifest m;
  try {
    m.nx = j.at("nx").get<int>();
    m.ny = j.at("ny").get<int>();
    m.nz = j.at("nz").get<int>();
    m.dz_um = j.at("dz_um").get<double>();
    m.focal_depth_um = j.value("focal_depth_um", 0.0);
    if (j.contains("amplitude_scale") && !j["amplitude_scale"].is_null())
      m.amplitude_scale = j["amplitude_scale"].get<double>();
    const bool has_slices = j.contains("slices");
    const bool has_raw = j.contains("raw");
    check(has_slices != has_raw, "manifest needs exactly one of \"slices\" or \"raw\"");
    if (has_slices) {
      for (const auto& s : j["slices"]) m.slices.push_back(base / s.get<std::string>());
    } else {
      m.raw = base / j["raw"].get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("invalid manifest '" + manifest_path.string() + "': " + e.what());
  }
  check(m.nx >= 1 && m.ny >= 1 && m.nz >= 1, "manifest dimensions must be >= 1");
  check(std::isfinite(m.dz_um) && m.dz_um > 0.0, "manifest dz_um must be > 0");
  check(!m.amplitude_scale || (std::isfinite(*m.amplitude_scale) && *m.amplitude_scale > 0.0),
        "manifest amplitude_scale must be > 0");
  return m;
}

void StackManifest::write(const fs::path& manifest_path) const {
  const fs::path base = manifest_path.parent_path();
  nlohmann::ordered_json j;
  j["nx"] = nx;
  j["ny"] = ny;
  j["nz"] = nz;
  j["dz_um"] = dz_um;
  j["focal_depth_um"] = focal_depth_um;
  if (raw) {
    j["raw"] = fs::relative(*raw, base.empty() ? fs::path(".") : base).generic_string();
  } else {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& s : slices)
      arr.push_back(fs::relative(s, base.empty() ? fs::path(".") : base).generic_string());
    j["slices"] = std::move(arr);
  }
  if (amplitude_scale) j["amplitude_scale"] = *amplitude_scale;
  std::ofstream out(manifest_path, std::ios::trunc);
  check(out.good(), "cannot write manifest: " + manifest_path.string());
  out << j.dump(2) << '\n';
  check(out.good(), "failed writing manifest: " + manifest_path.string());
}

std::vector<float> read_raw_f32(const fs::path& path, std::size_t count) {
  std::error_code ec;
  const auto size = fs::file_size(path, ec);
  check(!ec, "cannot stat raw block: " + path.string());
  check(size == count * sizeof(float),
        "raw block " + path.string() + " holds " + std::to_string(size) + " bytes, expected " +
            std::to_string(count * sizeof(float)));
  std::ifstream in(path, std::ios::binary);
  check(in.good(), "cannot open raw block: " + path.string());
  std::vector<std::uint32_t> words(count);
  in.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(size));
  check(static_cast<std::size_t>(in.gcount()) == size, "short read on " + path.string());
  std::vector<float> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t w = words[i];
    if constexpr (std::endian::native == std::endian::big) w = __builtin_bswap32(w);
    values[i] = std::bit_cast<float>(w);
  }
  return values;
}

void write_raw_f32(const fs::path& path, std::span<const float> values) {
  std::vector<std::uint32_t> words(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t w = std::bit_cast<std::uint32_t>(values[i]);
    if constexpr (std::endian::native == std::endian::big) w = __builtin_bswap32(w);
    words[i] = w;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  check(out.good(), "cannot write raw block: " + path.string());
  out.write(reinterpret_cast<const char*>(words.data()),
            static_cast<std::streamsize>(words.size() * sizeof(std::uint32_t)));
  out.flush();
  check(out.good(), "failed writing raw block: " + path.string());
}

Volume load_volume(const fs::path& manifest_path) {
  return load_volume(StackManifest::read(manifest_path));
}

Volume load_volume(const StackManifest& m) {
  const std::size_t plane = static_cast<std::size_t>(m.nx) * static_cast<std::size_t>(m.ny);
  std::vector<float> amps(plane * static_cast<std::size_t>(m.nz));

  if (m.raw) {
    const double scale = m.amplitude_scale.value_or(1.0);
    const auto raw = read_raw_f32(*m.raw, amps.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      const float v = raw[i];
      check(std::isfinite(v) && v >= 0.0f,
            "raw block holds a negative or non-finite amplitude at index " + std::to_string(i));
      const double a = scale == 1.0 ? static_cast<double>(v) : static_cast<double>(v) / scale;
      check(a <= 1.0, "raw amplitude exceeds amplitude_scale at index " + std::to_string(i));
      amps[i] = scale == 1.0 ? v : static_cast<float>(a);
    }
    return Volume(m.nx, m.ny, m.nz, m.dz_um, std::move(amps));
  }

  check(static_cast<int>(m.slices.size()) == m.nz,
        "manifest declares nz=" + std::to_string(m.nz) + " but lists " +
            std::to_string(m.slices.size()) + " slice files");
  for (int z = 0; z < m.nz; ++z) {
    const fs::path& slice_path = m.slices[static_cast<std::size_t>(z)];
    check(fs::exists(slice_path),
          "slice " + std::to_string(z) + " missing: " + slice_path.string());
    LoadedImage loaded;
    try {
      loaded = load_image_with_range(slice_path);
    } catch (const Error& e) {
      throw Error("slice " + std::to_string(z) + " (" + slice_path.string() + "): " + e.what());
    }
    check(loaded.image.width() == m.nx && loaded.image.height() == m.ny,
          "slice " + std::to_string(z) + " (" + slice_path.string() + ") is " +
              std::to_string(loaded.image.width()) + "x" + std::to_string(loaded.image.height()) +
              ", manifest says " + std::to_string(m.nx) + "x" + std::to_string(m.ny));
    const double factor = loaded.max_code / m.amplitude_scale.value_or(loaded.max_code);
    for (std::size_t i = 0; i < plane; ++i) {
      const double a = loaded.image[i] * factor;
      check(a <= 1.0 + 1e-12, "slice " + std::to_string(z) + " exceeds amplitude_scale");
      amps[static_cast<std::size_t>(z) * plane + i] = static_cast<float>(std::min(a, 1.0));
    }
  }
  return Volume(m.nx, m.ny, m.nz, m.dz_um, std::move(amps));
}

void save_volume(const Volume& vol, const fs::path& manifest_path, double focal_depth_um,
                 VolumeStorage storage) {
  StackManifest m;
  m.nx = vol.nx();
  m.ny = vol.ny();
  m.nz = vol.nz();
  m.dz_um = vol.dz_um();
  m.focal_depth_um = focal_depth_um;
  const fs::path base = manifest_path.parent_path();
  const std::string stem = manifest_path.stem().string();
  if (storage == VolumeStorage::kRaw) {
    m.raw = base / (stem + ".raw");
    write_raw_f32(*m.raw, vol.amplitudes());
  } else {
    for (int z = 0; z < vol.nz(); ++z) {
      char name[64];
      std::snprintf(name, sizeof name, "_z%04d.png", z);
      const fs::path p = base / (stem + name);
      save_image(ImageF::from_raster(vol.slice(z)), p, BitDepth::k16);
      m.slices.push_back(p);
    }
  }
  m.write(manifest_path);
}

Projection map_projection(const Volume& vol) {
  Raster map(vol.nx(), vol.ny(), 0.0);
  DepthMap depth{Grid<int>(vol.nx(), vol.ny(), 0), vol.nz()};
  for (int y = 0; y < vol.ny(); ++y) {
    for (int x = 0; x < vol.nx(); ++x) {
      float best = vol(x, y, 0);
      int best_z = 0;
      for (int z = 1; z < vol.nz(); ++z) {
        const float v = vol(x, y, z);
        if (v > best) {
          best = v;
          best_z = z;
        }
      }
      map(x, y) = best;
      depth.z(x, y) = best_z;
    }
  }
  return {ImageF::clamped(std::move(map)), std::move(depth)};
}

namespace {
// Fully saturated HSV colors at hues 240 (blue), 210, 180 (cyan), 120
// (green), 60 (yellow), 30, 0 (red). Hue falls linearly with position, and
// HSV is piecewise linear between these anchors.
constexpr PaletteAnchor kPalette[] = {
    {0.0, 0.0, 0.0, 1.0},   {0.125, 0.0, 0.5, 1.0}, {0.25, 0.0, 1.0, 1.0}, {0.5, 0.0, 1.0, 0.0},
    {0.75, 1.0, 1.0, 0.0}, {0.875, 1.0, 0.5, 0.0}, {1.0, 1.0, 0.0, 0.0},
};
}  // namespace

std::span<const PaletteAnchor> depth_palette() { return kPalette; }

std::array<double, 3> palette_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const auto palette = depth_palette();
  for (std::size_t i = 1; i < palette.size(); ++i) {
    const auto& lo = palette[i - 1];
    const auto& hi = palette[i];
    if (t <= hi.position) {
      const double f = (t - lo.position) / (hi.position - lo.position);
      return {lo.r + f * (hi.r - lo.r), lo.g + f * (hi.g - lo.g), lo.b + f * (hi.b - lo.b)};
    }
  }
  const auto& last = palette.back();
  return {last.r, last.g, last.b};
}

RgbImage depth_code(const ImageF& map, const DepthMap& depth, double dz_um) {
  check(map.same_shape(depth.z), "map and depth map differ in size");
  check(std::isfinite(dz_um) && dz_um > 0.0, "dz must be > 0");
  check(depth.nz >= 1, "depth map nz must be >= 1");
  const double span_um = (depth.nz - 1) * dz_um;
  RgbImage out{map.width(), map.height(), {}};
  out.pixels.resize(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) {
    const int z = depth.z[i];
    check(z >= 0 && z < depth.nz, "depth index out of range");
    const double t = span_um > 0.0 ? (z * dz_um) / span_um : 0.0;
    const auto rgb = palette_color(t);
    for (int c = 0; c < 3; ++c)
      out.pixels[i][static_cast<std::size_t>(c)] =
          static_cast<std::uint8_t>(std::lround(rgb[static_cast<std::size_t>(c)] * map[i] * 255.0));
  }
  return out;
}

StackFusion fuse_stacks(std::span<const Acquisition> acquisitions, double dz_um,
                        const FusionConfig& config) {
  check(acquisitions.size() >= 2, "stack fusion needs at least two acquisitions");
  const ImageF& first = acquisitions.front().map;
  int nz = 1;
  std::vector<ImageF> maps;
  for (const auto& acq : acquisitions) {
    check(acq.map.same_shape(first) && acq.depth.z.same_shape(first.raster()),
          "acquisitions are not registered to the same grid");
    nz = std::max(nz, acq.depth.nz);
    maps.push_back(acq.map);
  }

  StackFusion out;
  out.detail = mwgf_fuse(maps, config);
  out.map = out.detail.fused;
  out.depth = DepthMap{Grid<int>(first.width(), first.height(), 0), nz};
  const auto& w = out.detail.weights.maps;
  for (std::size_t i = 0; i < first.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t n = 1; n < w.size(); ++n)
      if (w[n][i] > w[best][i]) best = n;
    out.depth.z[i] = acquisitions[best].depth.z[i];
  }
  out.color = depth_code(out.map, out.depth, dz_um);
  return out;
}

}  // namespace mfuse
