#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

#include "mfuse/baselines.hpp"
#include "mfuse/error.hpp"
#include "mfuse/filters.hpp"
#include "mfuse/image_io.hpp"
#include "mfuse/metrics.hpp"
#include "mfuse/mwgf.hpp"
#include "mfuse/pam_stack.hpp"
#include "mfuse/synth.hpp"

namespace py = pybind11;
using namespace mfuse;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Arrays are (height, width), row-major.
Raster to_raster(const Array& a) {
  if (a.ndim() != 2) throw Error("expected a 2-D array");
  const auto h = static_cast<int>(a.shape(0));
  const auto w = static_cast<int>(a.shape(1));
  return Raster(w, h, std::vector<double>(a.data(), a.data() + a.size()));
}

ImageF to_image(const Array& a) { return ImageF::from_raster(to_raster(a)); }

template <typename T>
py::array_t<T> to_array(const Grid<T>& g) {
  py::array_t<T> out({g.height(), g.width()});
  std::copy(g.data().begin(), g.data().end(), out.mutable_data());
  return out;
}

py::array_t<double> to_array(const ImageF& img) { return to_array(img.raster()); }

std::vector<ImageF> to_images(const std::vector<Array>& arrays) {
  std::vector<ImageF> out;
  for (const auto& a : arrays) out.push_back(to_image(a));
  return out;
}

FusionConfig make_config(double sigma_large, double sigma_small, int close_radius,
                         int band_radius, const std::string& domain) {
  FusionConfig c{sigma_large, sigma_small, close_radius, band_radius, parse_fusion_domain(domain)};
  c.validate();
  return c;
}

py::dict report_dict(const MetricReport& r) {
  py::dict d;
  d["entropy"] = r.entropy;
  d["average_gradient"] = r.average_gradient;
  d["std_dev"] = r.std_dev;
  d["edge_strength"] = r.edge_strength;
  d["mse"] = r.mse ? py::object(py::float_(*r.mse)) : py::none();
  return d;
}

synth::Scene to_scene(const Array& gt, const Array& depth_um) {
  synth::Scene s{to_image(gt), to_raster(depth_um)};
  check(s.gt.same_shape(s.depth_um), "gt and depth differ in shape");
  return s;
}

}  // namespace

PYBIND11_MODULE(_mfuse, m) {
  m.doc() = "Multi-focus image fusion core";
  py::register_exception<Error>(m, "Error", PyExc_ValueError);

  m.def("load_image", [](const std::filesystem::path& p) { return to_array(load_image(p)); },
        py::arg("path"), "Grayscale image as float64 in [0, 1].");
  m.def(
      "save_image",
      [](const Array& a, const std::filesystem::path& p, int bits) {
        check(bits == 8 || bits == 16, "bit_depth must be 8 or 16");
        save_image(to_image(a), p, bits == 8 ? BitDepth::k8 : BitDepth::k16);
      },
      py::arg("image"), py::arg("path"), py::arg("bit_depth") = 8);

  m.def(
      "sobel_gradient",
      [](const Array& a) {
        const auto g = sobel_gradient(to_raster(a));
        return py::make_tuple(to_array(g.gx), to_array(g.gy));
      },
      py::arg("image"));
  m.def("gaussian_blur", [](const Array& a, double s) { return to_array(gaussian_blur(to_raster(a), s)); },
        py::arg("image"), py::arg("sigma"));

  m.def(
      "mwgf_fuse",
      [](const std::vector<Array>& images, double sigma_large, double sigma_small,
         int close_radius, int band_radius, const std::string& domain, bool details) -> py::object {
        const auto cfg = make_config(sigma_large, sigma_small, close_radius, band_radius, domain);
        const auto src = to_images(images);
        FusionResult r;
        {
          py::gil_scoped_release release;
          r = mwgf_fuse(src, cfg);
        }
        if (!details) return to_array(r.fused);
        py::dict d;
        d["fused"] = to_array(r.fused);
        py::list weights, sal_l, sal_s, initial, refined;
        for (const auto& w : r.weights.maps) weights.append(to_array(w));
        for (const auto& s : r.saliency_large) sal_l.append(to_array(s));
        for (const auto& s : r.saliency_small) sal_s.append(to_array(s));
        for (const auto& b : r.initial_regions) initial.append(to_array(b));
        for (const auto& b : r.refined_regions) refined.append(to_array(b));
        d["weights"] = weights;
        d["trimap"] = to_array(r.trimap.labels);
        d["saliency_large"] = sal_l;
        d["saliency_small"] = sal_s;
        d["initial_regions"] = initial;
        d["refined_regions"] = refined;
        return d;
      },
      py::arg("images"), py::arg("sigma_large") = 11.0, py::arg("sigma_small") = 1.0,
      py::arg("close_radius") = 5, py::arg("band_radius") = 11, py::arg("domain") = "pixel",
      py::arg("details") = false,
      "Fuse registered images. With details=True returns a dict of intermediates; "
      "trimap uses -1 for the unknown band.");

  m.def(
      "baseline_fuse",
      [](const Array& a, const Array& b, const std::string& method, int levels) {
        return to_array(baseline_fuse(to_image(a), to_image(b), {parse_baseline_kind(method), levels}));
      },
      py::arg("a"), py::arg("b"), py::arg("method"), py::arg("levels") = 4,
      "method is one of average, lap, dwt, pca, gra, fsd.");

  m.def(
      "reconstruct_from_gradients",
      [](const Array& gx, const Array& gy, double anchor_mean) {
        return to_array(reconstruct_from_gradients({to_raster(gx), to_raster(gy)}, anchor_mean));
      },
      py::arg("gx"), py::arg("gy"), py::arg("anchor_mean"));

  m.def(
      "metrics",
      [](const Array& img, std::optional<Array> ref) {
        const ImageF i = to_image(img);
        if (!ref) return report_dict(metric_report(i));
        const ImageF r = to_image(*ref);
        return report_dict(metric_report(i, &r));
      },
      py::arg("image"), py::arg("reference") = py::none());

  m.def(
      "make_scene",
      [](const std::string& kind, int width, int height, std::uint64_t seed) {
        const auto s = synth::make_scene(synth::parse_scene_kind(kind), width, height, seed);
        return py::make_tuple(to_array(s.gt), to_array(s.depth_um));
      },
      py::arg("kind"), py::arg("width"), py::arg("height"), py::arg("seed") = 0,
      "Returns (ground_truth, depth_um).");
  m.def(
      "defocus_render",
      [](const Array& gt, const Array& depth_um, double focus_um, double dof_um) {
        return to_array(synth::defocus_render(to_scene(gt, depth_um), focus_um, dof_um));
      },
      py::arg("gt"), py::arg("depth_um"), py::arg("focus_um"), py::arg("dof_um") = 120.0);
  m.def(
      "dof_curve",
      [](const Array& gt, const Array& depth_um, const std::vector<double>& foci, double dof_um,
         std::optional<std::vector<double>> probes) {
        const auto scene = to_scene(gt, depth_um);
        const auto p = probes ? *probes : synth::distinct_depths(scene.depth_um);
        std::vector<synth::AcquisitionSpec> specs;
        for (double f : foci) specs.push_back({f, dof_um});
        const auto fuse = specs.size() == 1 ? synth::DofFusion::kNone : synth::DofFusion::kMwgf;
        const auto curve = synth::dof_curve(scene, specs, fuse, p);
        std::vector<std::pair<double, double>> out;
        for (const auto& s : curve) out.emplace_back(s.depth_um, s.sharpness);
        return py::make_tuple(out, synth::in_focus_support(curve));
      },
      py::arg("gt"), py::arg("depth_um"), py::arg("foci"), py::arg("dof_um") = 120.0,
      py::arg("probes") = py::none(),
      "One focus gives the single-acquisition curve, several give the fused one. "
      "Returns ([(depth_um, sharpness)], in_focus_support).");

  m.def(
      "map_projection",
      [](const py::array_t<float, py::array::c_style | py::array::forcecast>& vol) {
        if (vol.ndim() != 3) throw Error("expected a (nz, ny, nx) array");
        const Volume v(static_cast<int>(vol.shape(2)), static_cast<int>(vol.shape(1)),
                       static_cast<int>(vol.shape(0)), 1.0,
                       std::vector<float>(vol.data(), vol.data() + vol.size()));
        const auto p = map_projection(v);
        return py::make_tuple(to_array(p.map), to_array(p.depth.z));
      },
      py::arg("volume"), "Returns (map, z_index) for a (nz, ny, nx) volume.");
  m.def(
      "depth_code",
      [](const Array& map, const py::array_t<int, py::array::c_style | py::array::forcecast>& z,
         int nz, double dz_um) {
        if (z.ndim() != 2) throw Error("expected a 2-D depth index array");
        const DepthMap d{Grid<int>(static_cast<int>(z.shape(1)), static_cast<int>(z.shape(0)),
                                   std::vector<int>(z.data(), z.data() + z.size())),
                         nz};
        const auto rgb = depth_code(to_image(map), d, dz_um);
        py::array_t<std::uint8_t> out({rgb.height, rgb.width, 3});
        auto* dst = out.mutable_data();
        for (const auto& px : rgb.pixels)
          for (auto c : px) *dst++ = c;
        return out;
      },
      py::arg("map"), py::arg("z_index"), py::arg("nz"), py::arg("dz_um"));
}
