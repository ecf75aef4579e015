#pragma once

#include <optional>
#include <string>

#include "mfuse/image.hpp"

namespace mfuse {

// All metrics work on the 0-255 code scale so values are comparable with
// tables reported for 8-bit images.

/// Shannon entropy in bits of the 256-bin histogram of round(s*255).
double entropy(const ImageF& img);

/// Mean of sqrt((dx^2 + dy^2)/2) over forward differences on the
/// (W-1)x(H-1) interior. Needs both sides >= 2.
double average_gradient(const ImageF& img);

/// Population standard deviation.
double std_dev(const ImageF& img);

/// Mean calibrated Sobel magnitude.
double edge_strength(const ImageF& img);

/// Mean squared difference.
double mse(const ImageF& a, const ImageF& b);

struct MetricReport {
  double entropy = 0.0;
  double average_gradient = 0.0;
  double std_dev = 0.0;
  double edge_strength = 0.0;
  std::optional<double> mse;

  /// Flat JSON object; values rounded to 6 significant digits.
  std::string to_json() const;
};

MetricReport metric_report(const ImageF& img, const ImageF* reference = nullptr);

/// Rounds to 6 significant digits (the precision of every JSON report).
double round_sig6(double v);

}  // namespace mfuse
