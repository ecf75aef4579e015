#pragma once

#include "mfuse/image.hpp"

namespace mfuse {

/// Closing (dilate then erode) with a Euclidean disk of the given radius.
/// Outside the image counts as background for dilation and foreground for
/// erosion, so the frame never erodes the result.
BitMask morph_close(const BitMask& mask, int radius);

BitMask morph_dilate(const BitMask& mask, int radius);
BitMask morph_erode(const BitMask& mask, int radius);

/// Background not 4-connected to the image border becomes foreground.
BitMask fill_holes(const BitMask& mask);

/// 8-connected labeling; labels follow raster-scan first-encounter order.
LabelMap connected_components(const BitMask& mask);

/// Mask of the largest component; ties go to the smaller label.
/// Returns an all-background mask when there are no components.
BitMask largest_component(const LabelMap& labels);

}  // namespace mfuse
