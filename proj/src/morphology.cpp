#include "mfuse/morphology.hpp"

#include <cmath>
#include <numeric>
#include <queue>

namespace mfuse {
namespace {

// Half-widths of the Euclidean disk per row offset: |dx| <= hw[|dy|].
std::vector<int> disk_half_widths(int radius) {
  std::vector<int> hw(static_cast<std::size_t>(radius + 1));
  for (int dy = 0; dy <= radius; ++dy) {
    int k = 0;
    while ((k + 1) * (k + 1) + dy * dy <= radius * radius) ++k;
    hw[static_cast<std::size_t>(dy)] = k;
  }
  return hw;
}

// Per-row prefix counts of foreground pixels; row y occupies
// [y*(w+1), (y+1)*(w+1)).
std::vector<int> row_prefix_counts(const BitMask& mask) {
  const int w = mask.width();
  std::vector<int> pre(static_cast<std::size_t>(w + 1) * static_cast<std::size_t>(mask.height()));
  for (int y = 0; y < mask.height(); ++y) {
    int* row = pre.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(w + 1);
    row[0] = 0;
    for (int x = 0; x < w; ++x) row[x + 1] = row[x] + (mask(x, y) ? 1 : 0);
  }
  return pre;
}

}  // namespace

BitMask morph_dilate(const BitMask& mask, int radius) {
  check(radius >= 0, "morphology radius must be >= 0");
  if (radius == 0) return mask;
  const int w = mask.width();
  const int h = mask.height();
  const auto hw = disk_half_widths(radius);
  const auto pre = row_prefix_counts(mask);
  BitMask out(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool hit = false;
      for (int dy = -radius; dy <= radius && !hit; ++dy) {
        const int sy = y + dy;
        if (sy < 0 || sy >= h) continue;
        const int k = hw[static_cast<std::size_t>(std::abs(dy))];
        const int lo = std::max(0, x - k);
        const int hi = std::min(w - 1, x + k);
        const int* row = pre.data() + static_cast<std::size_t>(sy) * static_cast<std::size_t>(w + 1);
        hit = row[hi + 1] - row[lo] > 0;
      }
      out(x, y) = hit ? 1 : 0;
    }
  }
  return out;
}

BitMask morph_erode(const BitMask& mask, int radius) {
  check(radius >= 0, "morphology radius must be >= 0");
  if (radius == 0) return mask;
  const int w = mask.width();
  const int h = mask.height();
  const auto hw = disk_half_widths(radius);
  const auto pre = row_prefix_counts(mask);
  BitMask out(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool keep = true;
      for (int dy = -radius; dy <= radius && keep; ++dy) {
        const int sy = y + dy;
        if (sy < 0 || sy >= h) continue;  // outside counts as foreground
        const int k = hw[static_cast<std::size_t>(std::abs(dy))];
        const int lo = std::max(0, x - k);
        const int hi = std::min(w - 1, x + k);
        const int* row = pre.data() + static_cast<std::size_t>(sy) * static_cast<std::size_t>(w + 1);
        keep = row[hi + 1] - row[lo] == hi - lo + 1;
      }
      out(x, y) = keep ? 1 : 0;
    }
  }
  return out;
}

BitMask morph_close(const BitMask& mask, int radius) {
  check(radius >= 0, "closing radius must be >= 0");
  if (radius == 0) return mask;
  return morph_erode(morph_dilate(mask, radius), radius);
}

BitMask fill_holes(const BitMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  BitMask outside(w, h, 0);
  std::queue<std::pair<int, int>> frontier;
  auto seed = [&](int x, int y) {
    if (!mask(x, y) && !outside(x, y)) {
      outside(x, y) = 1;
      frontier.emplace(x, y);
    }
  };
  for (int x = 0; x < w; ++x) {
    seed(x, 0);
    seed(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    seed(0, y);
    seed(w - 1, y);
  }
  constexpr int kDx[4] = {1, -1, 0, 0};
  constexpr int kDy[4] = {0, 0, 1, -1};
  while (!frontier.empty()) {
    const auto [x, y] = frontier.front();
    frontier.pop();
    for (int k = 0; k < 4; ++k) {
      const int nx = x + kDx[k];
      const int ny = y + kDy[k];
      if (mask.contains(nx, ny)) seed(nx, ny);
    }
  }
  BitMask out(w, h, 0);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = outside[i] ? 0 : 1;
  return out;
}

LabelMap connected_components(const BitMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  // Two-pass union-find over provisional labels.
  std::vector<int> parent{0};
  auto find = [&](int a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  };
  auto unite = [&](int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  };

  Grid<int> provisional(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y)) continue;
      int label = 0;
      const int nbr[4][2] = {{x - 1, y}, {x - 1, y - 1}, {x, y - 1}, {x + 1, y - 1}};
      for (const auto& n : nbr) {
        if (!provisional.contains(n[0], n[1])) continue;
        const int l = provisional(n[0], n[1]);
        if (l == 0) continue;
        if (label == 0)
          label = l;
        else
          unite(label, l);
      }
      if (label == 0) {
        label = static_cast<int>(parent.size());
        parent.push_back(label);
      }
      provisional(x, y) = label;
    }
  }

  LabelMap out{Grid<int>(w, h, 0), 0};
  std::vector<int> final_label(parent.size(), 0);
  for (std::size_t i = 0; i < provisional.size(); ++i) {
    const int l = provisional[i];
    if (l == 0) continue;
    const int root = find(l);
    int& f = final_label[static_cast<std::size_t>(root)];
    if (f == 0) f = ++out.count;
    out.labels[i] = f;
  }
  return out;
}

BitMask largest_component(const LabelMap& labels) {
  BitMask out(labels.labels.width(), labels.labels.height(), 0);
  if (labels.count == 0) return out;
  std::vector<std::size_t> sizes(static_cast<std::size_t>(labels.count + 1), 0);
  for (int l : labels.labels.data()) {
    check(l >= 0 && l <= labels.count, "label map value out of range");
    ++sizes[static_cast<std::size_t>(l)];
  }
  int best = 1;
  for (int l = 2; l <= labels.count; ++l)
    if (sizes[static_cast<std::size_t>(l)] > sizes[static_cast<std::size_t>(best)]) best = l;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = labels.labels[i] == best ? 1 : 0;
  return out;
}

}  // namespace mfuse
