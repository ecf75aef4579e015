#include "mfuse/metrics.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include <json.hpp>

#include "mfuse/filters.hpp"

namespace mfuse {

namespace {
constexpr double kCodeScale = 255.0;
}

double entropy(const ImageF& img) {
  std::array<std::size_t, 256> hist{};
  for (double s : img.samples()) ++hist[static_cast<std::size_t>(std::lround(s * kCodeScale))];
  const auto n = static_cast<double>(img.size());
  double h = 0.0;
  for (std::size_t count : hist) {
    if (count == 0) continue;
    const double p = static_cast<double>(count) / n;
    h -= p * std::log2(p);
  }
  return std::max(0.0, h);
}

double average_gradient(const ImageF& img) {
  check(img.width() >= 2 && img.height() >= 2, "average gradient needs at least a 2x2 image");
  double sum = 0.0;
  for (int y = 0; y + 1 < img.height(); ++y) {
    for (int x = 0; x + 1 < img.width(); ++x) {
      const double dx = (img(x + 1, y) - img(x, y)) * kCodeScale;
      const double dy = (img(x, y + 1) - img(x, y)) * kCodeScale;
      sum += std::sqrt(0.5 * (dx * dx + dy * dy));
    }
  }
  return sum / (static_cast<double>(img.width() - 1) * static_cast<double>(img.height() - 1));
}

double std_dev(const ImageF& img) {
  const double m = mean(img.samples());
  double ss = 0.0;
  for (double s : img.samples()) ss += (s - m) * (s - m);
  return std::sqrt(ss / static_cast<double>(img.size())) * kCodeScale;
}

double edge_strength(const ImageF& img) {
  return mean(gradient_magnitude(sobel_gradient(img)).data()) * kCodeScale;
}

double mse(const ImageF& a, const ImageF& b) {
  check(a.same_shape(b), "mse inputs differ in size");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = (a[i] - b[i]) * kCodeScale;
    sum += d * d;
  }
  return sum / static_cast<double>(a.size());
}

MetricReport metric_report(const ImageF& img, const ImageF* reference) {
  MetricReport r;
  r.entropy = entropy(img);
  r.average_gradient = average_gradient(img);
  r.std_dev = std_dev(img);
  r.edge_strength = edge_strength(img);
  if (reference != nullptr) r.mse = mse(img, *reference);
  return r;
}

double round_sig6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return std::strtod(buf, nullptr);
}

std::string MetricReport::to_json() const {
  nlohmann::ordered_json j;
  j["entropy"] = round_sig6(entropy);
  j["average_gradient"] = round_sig6(average_gradient);
  j["std_dev"] = round_sig6(std_dev);
  j["edge_strength"] = round_sig6(edge_strength);
  j["mse"] = mse ? nlohmann::ordered_json(round_sig6(*mse)) : nlohmann::ordered_json(nullptr);
  return j.dump();
}

}  // namespace mfuse
