#include "cli.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mfuse/baselines.hpp"
#include "mfuse/error.hpp"
#include "mfuse/image_io.hpp"
#include "mfuse/metrics.hpp"
#include "mfuse/mwgf.hpp"
#include "mfuse/pam_stack.hpp"
#include "mfuse/synth.hpp"

namespace mfuse::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

// Flag combinations CLI11 cannot express; reported with the usage exit code.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Stages every output under a temporary name and renames on commit.
// Uncommitted temporaries are removed on destruction.
class OutputSet {
 public:
  OutputSet() : tag_(".mfuse-tmp-" + std::to_string(::getpid()) + "-") {}
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;

  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& f : files_) fs::remove(f.temp, ec);
    for (const auto& d : dirs_) fs::remove_all(d.temp, ec);
  }

  // Returns the temporary path to write instead of `target`. The temporary
  // keeps the target's extension, which selects the image format.
  fs::path file(const fs::path& target) {
    check(!target.filename().empty(), "output path has no file name: " + target.string());
    const fs::path parent = parent_of(target);
    check(fs::is_directory(parent), "output directory does not exist: " + parent.string());
    check(!fs::is_directory(target), "output path is a directory: " + target.string());
    for (const auto& f : files_)
      check(f.target != target, "output path given twice: " + target.string());
    const fs::path temp = parent / (tag_ + target.filename().string());
    files_.push_back({temp, target});
    return temp;
  }

  // Returns a staging directory whose contents end up in `target`.
  fs::path directory(const fs::path& target) {
    const bool exists = fs::exists(target);
    fs::path temp;
    if (exists) {
      check(fs::is_directory(target), "output path is not a directory: " + target.string());
      temp = target / (tag_ + "stage");
    } else {
      const fs::path parent = parent_of(target);
      check(fs::is_directory(parent), "output directory does not exist: " + parent.string());
      temp = parent / (tag_ + target.filename().string());
    }
    std::error_code ec;
    fs::remove_all(temp, ec);
    fs::create_directory(temp, ec);
    check(!ec, "cannot create staging directory " + temp.string() + ": " + ec.message());
    dirs_.push_back({temp, target, exists});
    return temp;
  }

  void commit() {
    for (const auto& f : files_) fs::rename(f.temp, f.target);
    for (const auto& d : dirs_) {
      if (!d.merge) {
        fs::rename(d.temp, d.target);
        continue;
      }
      for (const auto& entry : fs::directory_iterator(d.temp)) {
        const fs::path dst = d.target / entry.path().filename();
        if (fs::is_directory(dst)) fs::remove_all(dst);
        fs::rename(entry.path(), dst);
      }
      fs::remove(d.temp);
    }
    committed_ = true;
  }

 private:
  struct Staged {
    fs::path temp;
    fs::path target;
    bool merge = false;
  };

  static fs::path parent_of(const fs::path& p) {
    return p.has_parent_path() ? p.parent_path() : fs::path(".");
  }

  std::string tag_;
  std::vector<Staged> files_;
  std::vector<Staged> dirs_;
  bool committed_ = false;
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  check(in.good(), "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  check(out.good(), "cannot write " + path.string());
  out << text;
  out.close();
  check(out.good(), "failed writing " + path.string());
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json number(double v) { return round_sig6(v); }

Json report_json(const MetricReport& r) { return Json::parse(r.to_json()); }

BitDepth parse_bit_depth(int bits) {
  if (bits == 8) return BitDepth::k8;
  if (bits == 16) return BitDepth::k16;
  throw UsageError("--bit-depth must be 8 or 16");
}

FusionConfig load_config(const std::string& config_path, const std::string& domain) {
  FusionConfig cfg;
  if (!config_path.empty()) cfg = FusionConfig::from_json(read_text(config_path));
  if (!domain.empty()) cfg.domain = parse_fusion_domain(domain);
  cfg.validate();
  return cfg;
}

std::vector<ImageF> load_all(const std::vector<std::string>& paths) {
  std::vector<ImageF> images;
  images.reserve(paths.size());
  for (const auto& p : paths) images.push_back(load_image(p));
  return images;
}

std::string format_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::pair<int, int> parse_size(const std::string& text) {
  int w = 0;
  int h = 0;
  char x = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%d%c%d%c", &w, &x, &h, &tail) != 3 || (x != 'x' && x != 'X'))
    throw UsageError("--size expects WxH, got '" + text + "'");
  return {w, h};
}

// Linear rescale of a non-negative raster to [0,1] by its maximum.
ImageF normalized(const Raster& r) {
  double peak = 0.0;
  for (double v : r.data()) peak = std::max(peak, v);
  Raster out(r.width(), r.height(), 0.0);
  if (peak > 0.0)
    for (std::size_t i = 0; i < r.size(); ++i) out[i] = r[i] / peak;
  return ImageF::clamped(out);
}

ImageF mask_image(const BitMask& m) {
  Raster out(m.width(), m.height(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i] ? 1.0 : 0.0;
  return ImageF::from_raster(out);
}

// Index 0 is the unknown band, index n+1 is source n.
std::vector<std::array<std::uint8_t, 3>> trimap_palette(int n_sources) {
  std::vector<std::array<std::uint8_t, 3>> palette{{128, 128, 128}};
  for (int n = 0; n < n_sources; ++n) {
    const double t = n_sources == 1 ? 0.0 : static_cast<double>(n) / (n_sources - 1);
    const auto c = palette_color(t);
    palette.push_back({static_cast<std::uint8_t>(std::lround(c[0] * 255)),
                       static_cast<std::uint8_t>(std::lround(c[1] * 255)),
                       static_cast<std::uint8_t>(std::lround(c[2] * 255))});
  }
  return palette;
}

void write_debug(const FusionResult& r, const FusionConfig& cfg, const fs::path& dir) {
  const int n_sources = r.trimap.n_sources;
  check(n_sources < 256, "too many sources for an indexed trimap");
  for (int n = 0; n < n_sources; ++n) {
    const std::string k = std::to_string(n);
    const auto i = static_cast<std::size_t>(n);
    save_image(normalized(r.saliency_large[i]), dir / ("saliency_large_" + k + ".png"),
               BitDepth::k16);
    save_image(normalized(r.saliency_small[i]), dir / ("saliency_small_" + k + ".png"),
               BitDepth::k16);
    save_image(mask_image(r.initial_regions[i]), dir / ("region_initial_" + k + ".png"));
    save_image(mask_image(r.refined_regions[i]), dir / ("region_refined_" + k + ".png"));
    save_image(ImageF::clamped(r.weights.maps[i]), dir / ("weight_" + k + ".png"), BitDepth::k16);
  }
  Grid<std::uint8_t> idx(r.trimap.width(), r.trimap.height(), 0);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const int label = r.trimap.labels[i];
    idx[i] = static_cast<std::uint8_t>(label == TriMap::kUnknown ? 0 : label + 1);
  }
  const auto palette = trimap_palette(n_sources);
  save_indexed_png(idx, palette, dir / "trimap.png");
  write_text(dir / "config.json", Json::parse(cfg.to_json()).dump(2) + "\n");
}

// ---- fuse ----

struct FuseArgs {
  std::string method = "mwgf";
  std::string config;
  std::string domain;
  std::string debug_dir;
  std::string out;
  int levels = 4;
  int bit_depth = 8;
  std::vector<std::string> inputs;
};

int run_fuse(const FuseArgs& a, std::ostream& out) {
  const BitDepth depth = parse_bit_depth(a.bit_depth);
  const bool is_mwgf = a.method == "mwgf";
  if (!is_mwgf) {
    if (!a.config.empty() || !a.domain.empty() || !a.debug_dir.empty())
      throw UsageError("--config, --domain and --debug-dir apply to --method mwgf only");
    if (a.inputs.size() != 2) throw UsageError("--method " + a.method + " fuses exactly two inputs");
  }
  const FusionConfig cfg = is_mwgf ? load_config(a.config, a.domain) : FusionConfig{};

  OutputSet outputs;
  const fs::path out_tmp = outputs.file(a.out);
  const std::optional<fs::path> debug_tmp =
      a.debug_dir.empty() ? std::nullopt : std::optional(outputs.directory(a.debug_dir));
  const auto images = load_all(a.inputs);

  if (is_mwgf) {
    const FusionResult r = mwgf_fuse(images, cfg);
    save_image(r.fused, out_tmp, depth);
    if (debug_tmp) write_debug(r, cfg, *debug_tmp);
  } else {
    const BaselineMethod m{parse_baseline_kind(a.method), a.levels};
    save_image(baseline_fuse(images[0], images[1], m), out_tmp, depth);
  }
  outputs.commit();
  out << "wrote " << a.out << "\n";
  return kExitOk;
}

// ---- metrics ----

struct MetricsArgs {
  std::string json;
  std::string ref;
  std::string image;
};

void print_report_row(std::ostream& out, const std::string& name, const Json& m) {
  char buf[160];
  auto field = [&](const char* key) -> std::string {
    return m[key].is_null() ? "-" : format_g(m[key].get<double>());
  };
  std::snprintf(buf, sizeof buf, "%-12s %10s %10s %10s %10s %12s\n", name.c_str(),
                field("entropy").c_str(), field("average_gradient").c_str(),
                field("std_dev").c_str(), field("edge_strength").c_str(), field("mse").c_str());
  out << buf;
}

void print_report_header(std::ostream& out) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-12s %10s %10s %10s %10s %12s\n", "image", "H", "AG", "SD",
                "ES", "MSE");
  out << buf;
}

int run_metrics(const MetricsArgs& a, std::ostream& out) {
  OutputSet outputs;
  const std::optional<fs::path> json_tmp =
      a.json.empty() ? std::nullopt : std::optional(outputs.file(a.json));
  const ImageF img = load_image(a.image);
  std::optional<ImageF> ref;
  if (!a.ref.empty()) ref = load_image(a.ref);
  const Json report = report_json(metric_report(img, ref ? &*ref : nullptr));
  if (!json_tmp) {
    out << dump(report);
    return kExitOk;
  }
  write_text(*json_tmp, dump(report));
  outputs.commit();
  print_report_header(out);
  print_report_row(out, fs::path(a.image).filename().string(), report);
  return kExitOk;
}

// ---- compare ----

struct CompareArgs {
  std::string gt;
  std::string json;
  std::string config;
  int levels = 4;
  std::vector<std::string> inputs;
};

constexpr BaselineKind kCompareBaselines[] = {BaselineKind::kLap, BaselineKind::kDwt,
                                              BaselineKind::kPca, BaselineKind::kGra,
                                              BaselineKind::kFsd};

int run_compare(const CompareArgs& a, std::ostream& out) {
  const FusionConfig cfg = load_config(a.config, "");
  OutputSet outputs;
  const fs::path json_tmp = outputs.file(a.json);
  const auto images = load_all(a.inputs);
  std::optional<ImageF> gt;
  if (!a.gt.empty()) gt = load_image(a.gt);
  const ImageF* ref = gt ? &*gt : nullptr;
  if (ref != nullptr)
    check(images[0].same_shape(*ref), "ground truth differs in size from the inputs");

  Json doc;
  doc["ground_truth"] = a.gt.empty() ? Json(nullptr) : Json(a.gt);
  doc["levels"] = a.levels;
  doc["config"] = Json::parse(cfg.to_json());
  Json inputs = Json::array();
  for (std::size_t i = 0; i < images.size(); ++i)
    inputs.push_back({{"path", a.inputs[i]}, {"metrics", report_json(metric_report(images[i], ref))}});
  doc["inputs"] = inputs;

  Json methods = Json::array();
  for (BaselineKind kind : kCompareBaselines) {
    const ImageF f = baseline_fuse(images[0], images[1], {kind, a.levels});
    methods.push_back({{"method", to_string(kind)}, {"metrics", report_json(metric_report(f, ref))}});
  }
  const ImageF fused = mwgf_fuse(images, cfg).fused;
  methods.push_back({{"method", "mwgf"}, {"metrics", report_json(metric_report(fused, ref))}});
  doc["methods"] = methods;

  const ImageF avg = baseline_fuse(images[0], images[1], {BaselineKind::kAverage, a.levels});
  doc["average"] = {{"method", "average"}, {"metrics", report_json(metric_report(avg, ref))}};

  write_text(json_tmp, dump(doc));
  outputs.commit();

  print_report_header(out);
  for (std::size_t i = 0; i < doc["inputs"].size(); ++i)
    print_report_row(out, "input " + std::to_string(i + 1), doc["inputs"][i]["metrics"]);
  for (const auto& m : doc["methods"])
    print_report_row(out, m["method"].get<std::string>(), m["metrics"]);
  print_report_row(out, "average", doc["average"]["metrics"]);
  return kExitOk;
}

// ---- project ----

struct ProjectArgs {
  std::vector<std::string> manifests;
  std::string map;
  std::string depthmap;
  std::string color;
  std::string config;
  int bit_depth = 16;
};

void write_depth_raw(const DepthMap& d, double dz_um, const fs::path& path) {
  std::vector<float> values(d.z.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    values[i] = static_cast<float>(d.z[i] * dz_um);
  write_raw_f32(path, values);
}

int run_project(const ProjectArgs& a, std::ostream& out) {
  const BitDepth depth = parse_bit_depth(a.bit_depth);
  if (a.manifests.size() == 1 && !a.config.empty())
    throw UsageError("--config applies only when fusing several manifests");
  const FusionConfig cfg = load_config(a.config, "");

  OutputSet outputs;
  const fs::path map_tmp = outputs.file(a.map);
  const fs::path depth_tmp = outputs.file(a.depthmap);
  const std::optional<fs::path> color_tmp =
      a.color.empty() ? std::nullopt : std::optional(outputs.file(a.color));

  std::vector<StackManifest> manifests;
  for (const auto& m : a.manifests) manifests.push_back(StackManifest::read(m));
  const double dz = manifests.front().dz_um;
  for (const auto& m : manifests) {
    check(m.dz_um == dz, "manifests disagree on dz_um");
    check(m.nz == manifests.front().nz, "manifests disagree on nz");
  }

  ImageF map;
  DepthMap depth_map;
  if (manifests.size() == 1) {
    Projection p = map_projection(load_volume(manifests.front()));
    map = std::move(p.map);
    depth_map = std::move(p.depth);
  } else {
    std::vector<Acquisition> acquisitions;
    for (const auto& m : manifests) {
      Projection p = map_projection(load_volume(m));
      acquisitions.push_back({std::move(p.map), std::move(p.depth), m.focal_depth_um});
    }
    StackFusion f = fuse_stacks(acquisitions, dz, cfg);
    map = std::move(f.map);
    depth_map = std::move(f.depth);
  }
  map = normalized(map.raster());

  save_image(map, map_tmp, depth);
  write_depth_raw(depth_map, dz, depth_tmp);
  if (color_tmp) save_rgb_png(depth_code(map, depth_map, dz), *color_tmp);
  outputs.commit();
  out << "projected " << a.manifests.size() << " stack(s) to " << a.map << "\n";
  return kExitOk;
}

// ---- synth ----

struct SynthArgs {
  std::string scene;
  std::string size = "512x512";
  std::uint64_t seed = 0;
  std::vector<double> foci;
  double dof = 120.0;
  std::string out;
  double volume_dz = 0.0;
};

std::string focus_name(double focus_um) { return "focus_" + format_g(focus_um) + "um"; }

// One stack per focus: each pixel's rendered amplitude sits at its depth slice.
void write_stack(const synth::Scene& scene, const ImageF& render, double focus_um, double dz,
                 const fs::path& manifest) {
  double max_depth = 0.0;
  for (double d : scene.depth_um.data()) max_depth = std::max(max_depth, d);
  const int nz = static_cast<int>(std::lround(max_depth / dz)) + 1;
  const int nx = render.width();
  const int ny = render.height();
  const std::size_t plane = render.size();
  std::vector<float> amps(plane * static_cast<std::size_t>(nz), 0.0f);
  for (std::size_t i = 0; i < plane; ++i) {
    const auto z = static_cast<std::size_t>(std::lround(scene.depth_um[i] / dz));
    amps[z * plane + i] = static_cast<float>(render[i]);
  }
  save_volume(Volume(nx, ny, nz, dz, std::move(amps)), manifest, focus_um, VolumeStorage::kRaw);
}

int run_synth(const SynthArgs& a, std::ostream& out) {
  const synth::SceneKind kind = synth::parse_scene_kind(a.scene);
  const auto [w, h] = parse_size(a.size);
  check(std::isfinite(a.dof) && a.dof > 0.0, "--dof must be positive");
  for (double f : a.foci) check(std::isfinite(f), "--focus must be finite");
  check(a.volume_dz >= 0.0 && std::isfinite(a.volume_dz), "--volume-dz must be positive");

  OutputSet outputs;
  const fs::path dir = outputs.directory(a.out);
  const synth::Scene scene = synth::make_scene(kind, w, h, a.seed);

  save_image(scene.gt, dir / "gt.png", BitDepth::k16);
  std::vector<float> depth(scene.depth_um.size());
  for (std::size_t i = 0; i < depth.size(); ++i) depth[i] = static_cast<float>(scene.depth_um[i]);
  write_raw_f32(dir / "depth.raw", depth);

  Json acquisitions = Json::array();
  for (double f : a.foci) {
    const ImageF render = synth::defocus_render(scene, f, a.dof);
    const std::string name = focus_name(f);
    save_image(render, dir / (name + ".png"), BitDepth::k16);
    Json entry{{"focus_um", number(f)}, {"image", name + ".png"}};
    if (a.volume_dz > 0.0) {
      write_stack(scene, render, f, a.volume_dz, dir / (name + ".json"));
      entry["stack"] = name + ".json";
    }
    acquisitions.push_back(entry);
  }

  Json doc;
  doc["scene"] = synth::to_string(kind);
  doc["width"] = w;
  doc["height"] = h;
  doc["seed"] = a.seed;
  doc["dof_um"] = number(a.dof);
  doc["gt"] = "gt.png";
  doc["depth_raw"] = "depth.raw";
  doc["depth_format"] = "float32le_um";
  doc["acquisitions"] = acquisitions;
  write_text(dir / "scene.json", dump(doc));
  outputs.commit();
  out << "wrote " << a.out << "\n";
  return kExitOk;
}

// ---- evaluate-dof ----

struct DofArgs {
  std::string scene_dir;
  std::vector<double> foci;
  std::string json;
  std::vector<double> probes;
  std::string config;
  std::string domain;
};

Json curve_json(const std::vector<synth::DofSample>& curve) {
  Json arr = Json::array();
  for (const auto& s : curve)
    arr.push_back({{"depth_um", number(s.depth_um)}, {"sharpness", number(s.sharpness)}});
  return arr;
}

int run_evaluate_dof(const DofArgs& a, std::ostream& out) {
  if (a.foci.size() < 2) throw UsageError("--foci needs at least two depths");
  const FusionConfig cfg = load_config(a.config, a.domain);
  OutputSet outputs;
  const fs::path json_tmp = outputs.file(a.json);

  const fs::path dir = a.scene_dir;
  const Json meta = Json::parse(read_text(dir / "scene.json"));
  const int w = meta.at("width").get<int>();
  const int h = meta.at("height").get<int>();
  const double dof = meta.at("dof_um").get<double>();
  synth::Scene scene;
  scene.gt = load_image(dir / meta.at("gt").get<std::string>());
  check(scene.gt.width() == w && scene.gt.height() == h, "gt size disagrees with scene.json");
  const auto depth = read_raw_f32(dir / meta.at("depth_raw").get<std::string>(),
                                  static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  scene.depth_um = Raster(w, h, 0.0);
  for (std::size_t i = 0; i < depth.size(); ++i) scene.depth_um[i] = depth[i];

  const std::vector<double> probes = a.probes.empty() ? synth::distinct_depths(scene.depth_um)
                                                      : a.probes;
  std::vector<synth::AcquisitionSpec> specs;
  for (double f : a.foci) specs.push_back({f, dof});

  Json doc;
  doc["scene"] = meta.value("scene", "");
  doc["dof_um"] = number(dof);
  Json foci = Json::array();
  for (double f : a.foci) foci.push_back(number(f));
  doc["foci_um"] = foci;
  Json probe_json = Json::array();
  for (double p : probes) probe_json.push_back(number(p));
  doc["probe_depths_um"] = probe_json;
  doc["in_focus_fraction"] = number(synth::kInFocusFraction);

  Json singles = Json::array();
  int best_single = 0;
  std::vector<std::vector<synth::DofSample>> single_curves;
  for (const auto& s : specs) {
    const auto curve = synth::dof_curve(scene, std::span(&s, 1), synth::DofFusion::kNone, probes);
    const int support = synth::in_focus_support(curve);
    best_single = std::max(best_single, support);
    singles.push_back({{"focus_um", number(s.focus_um)}, {"curve", curve_json(curve)},
                       {"support", support}});
    single_curves.push_back(curve);
  }
  const auto fused = synth::dof_curve(scene, specs, synth::DofFusion::kMwgf, probes, cfg);
  const int fused_support = synth::in_focus_support(fused);
  doc["single"] = singles;
  doc["fused"] = {{"curve", curve_json(fused)}, {"support", fused_support}};
  doc["support_ratio"] =
      best_single > 0 ? number(static_cast<double>(fused_support) / best_single) : Json(nullptr);

  write_text(json_tmp, dump(doc));
  outputs.commit();

  char buf[128];
  std::snprintf(buf, sizeof buf, "%10s", "depth_um");
  out << buf;
  for (double f : a.foci) {
    std::snprintf(buf, sizeof buf, " %12s", ("f=" + format_g(f)).c_str());
    out << buf;
  }
  out << "        fused\n";
  for (std::size_t i = 0; i < probes.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%10g", probes[i]);
    out << buf;
    for (const auto& c : single_curves) {
      std::snprintf(buf, sizeof buf, " %12.6g", c[i].sharpness);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, " %12.6g\n", fused[i].sharpness);
    out << buf;
  }
  out << "support: single " << best_single << ", fused " << fused_support << ", ratio "
      << (best_single > 0 ? format_g(static_cast<double>(fused_support) / best_single) : "n/a")
      << "\n";
  return kExitOk;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-focus image fusion toolkit", "mfuse"};
  app.require_subcommand(1);

  const std::vector<std::string> fuse_methods{"mwgf", "average", "lap", "dwt", "pca", "gra", "fsd"};
  const std::vector<std::string> domains{"pixel", "gradient"};
  const std::vector<std::string> scenes{"two_plane", "vessels", "clocks", "ladder"};

  FuseArgs fa;
  auto* fuse = app.add_subcommand("fuse", "Fuse registered multi-focus images");
  fuse->add_option("--method", fa.method, "Fusion method")->check(CLI::IsMember(fuse_methods));
  fuse->add_option("--config", fa.config, "MWGF parameters as JSON")->check(CLI::ExistingFile);
  fuse->add_option("--domain", fa.domain, "Fusion domain")->check(CLI::IsMember(domains));
  fuse->add_option("--debug-dir", fa.debug_dir, "Directory for MWGF intermediates");
  fuse->add_option("--levels", fa.levels, "Pyramid levels for baselines")
      ->check(CLI::Range(1, 30));
  fuse->add_option("--bit-depth", fa.bit_depth, "Output bit depth (8 or 16)");
  fuse->add_option("--out", fa.out, "Fused image")->required();
  fuse->add_option("inputs", fa.inputs, "Input images")->required()->expected(2, -1);

  MetricsArgs ma;
  auto* metrics = app.add_subcommand("metrics", "Image quality metrics");
  metrics->add_option("--json", ma.json, "Write the report here");
  metrics->add_option("--ref", ma.ref, "Reference image for MSE");
  metrics->add_option("image", ma.image, "Image to measure")->required();

  CompareArgs ca;
  auto* compare = app.add_subcommand("compare", "Run every fusion method and tabulate metrics");
  compare->add_option("--gt", ca.gt, "Ground-truth image for MSE");
  compare->add_option("--json", ca.json, "Report path")->required();
  compare->add_option("--config", ca.config, "MWGF parameters as JSON")->check(CLI::ExistingFile);
  compare->add_option("--levels", ca.levels, "Pyramid levels for baselines")
      ->check(CLI::Range(1, 30));
  compare->add_option("inputs", ca.inputs, "Two input images")->required()->expected(2);

  ProjectArgs pa;
  auto* project = app.add_subcommand("project", "Max amplitude projection of a focal stack");
  project->add_option("--manifest", pa.manifests, "Stack manifest (repeat to fuse stacks)")
      ->required();
  project->add_option("--map", pa.map, "Projection image")->required();
  project->add_option("--depthmap", pa.depthmap, "Depth map, float32 um")->required();
  project->add_option("--color", pa.color, "Depth-coded RGB image");
  project->add_option("--config", pa.config, "MWGF parameters as JSON")->check(CLI::ExistingFile);
  project->add_option("--bit-depth", pa.bit_depth, "Projection bit depth (8 or 16)");

  SynthArgs sa;
  auto* synth_cmd = app.add_subcommand("synth", "Render a synthetic multi-focus scene");
  synth_cmd->add_option("--scene", sa.scene, "Scene kind")
      ->required()
      ->check(CLI::IsMember(scenes));
  synth_cmd->add_option("--size", sa.size, "WxH");
  synth_cmd->add_option("--seed", sa.seed, "Random seed");
  synth_cmd->add_option("--focus", sa.foci, "Focal depths in um (comma separated)")
      ->required()
      ->delimiter(',');
  synth_cmd->add_option("--dof", sa.dof, "Depth of field in um");
  synth_cmd->add_option("--volume-dz", sa.volume_dz, "Also write focal stacks at this z step");
  synth_cmd->add_option("--out", sa.out, "Output directory")->required();

  DofArgs da;
  auto* dof = app.add_subcommand("evaluate-dof", "Measure depth-of-field extension");
  dof->add_option("--scene-dir", da.scene_dir, "Directory written by synth")
      ->required()
      ->check(CLI::ExistingDirectory);
  dof->add_option("--foci", da.foci, "Focal depths in um")->required()->delimiter(',');
  dof->add_option("--json", da.json, "Report path")->required();
  dof->add_option("--probes", da.probes, "Probe depths in um")->delimiter(',');
  dof->add_option("--config", da.config, "MWGF parameters as JSON")->check(CLI::ExistingFile);
  dof->add_option("--domain", da.domain, "Fusion domain")->check(CLI::IsMember(domains));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "mfuse: usage: " << one_line(e.what()) << "\n";
    return kExitUsage;
  }

  try {
    if (*fuse) return run_fuse(fa, out);
    if (*metrics) return run_metrics(ma, out);
    if (*compare) return run_compare(ca, out);
    if (*project) return run_project(pa, out);
    if (*synth_cmd) return run_synth(sa, out);
    if (*dof) return run_evaluate_dof(da, out);
  } catch (const UsageError& e) {
    err << "mfuse: usage: " << one_line(e.what()) << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "mfuse: error: " << one_line(e.what()) << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace mfuse::cli
