#include "mycloth/cloth_edit/recolor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "mycloth/common/error.hpp"

namespace mycloth::cloth_edit {

namespace {

void require_rgb_and_mask(const Raster& image, const Raster& mask) {
  if (image.channels() != 3) throw ValidationError("image must be RGB");
  if (mask.channels() != 1) throw ValidationError("cloth mask must be single-channel");
  if (!image.same_size(mask)) {
    throw ValidationError("image and cloth mask dimensions differ");
  }
}

bool in_mask(const Raster& mask, int x, int y) {
  return mask.contains(x, y) && mask.at(x, y, 0) != 0;
}

}  // namespace

Raster denoise_median3(const Raster& image, const Raster& cloth_mask) {
  require_rgb_and_mask(image, cloth_mask);
  Raster out = image;
  std::array<std::uint8_t, 9> window{};
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (!in_mask(cloth_mask, x, y)) continue;
      for (int c = 0; c < 3; ++c) {
        std::size_t n = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (in_mask(cloth_mask, x + dx, y + dy)) window[n++] = image.at(x + dx, y + dy, c);
          }
        }
        auto mid = window.begin() + static_cast<std::ptrdiff_t>((n - 1) / 2);
        std::nth_element(window.begin(), mid, window.begin() + static_cast<std::ptrdiff_t>(n));
        out.at(x, y, c) = *mid;
      }
    }
  }
  return out;
}

ColorRGB compute_main_color(const Raster& image, const Raster& cloth_mask) {
  require_rgb_and_mask(image, cloth_mask);
  constexpr int kBuckets = 32;
  std::vector<long long> counts(kBuckets * kBuckets * kBuckets, 0);
  std::vector<std::array<long long, 3>> sums(counts.size(), {0, 0, 0});
  long long selected = 0;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (cloth_mask.at(x, y, 0) == 0) continue;
      int r = image.at(x, y, 0), g = image.at(x, y, 1), b = image.at(x, y, 2);
      std::size_t bucket = (static_cast<std::size_t>(r / 8) * kBuckets + g / 8) * kBuckets + b / 8;
      ++counts[bucket];
      sums[bucket][0] += r;
      sums[bucket][1] += g;
      sums[bucket][2] += b;
      ++selected;
    }
  }
  if (selected == 0) throw ValidationError("cloth mask selects no pixels");
  // Buckets are laid out in lexicographic (r, g, b) order, so the first
  // maximum is the tie-break winner.
  auto best = static_cast<std::size_t>(
      std::distance(counts.begin(), std::max_element(counts.begin(), counts.end())));
  auto mean = [&](int c) {
    return static_cast<int>(std::lround(static_cast<double>(sums[best][c]) / counts[best]));
  };
  return ColorRGB::from_ints(mean(0), mean(1), mean(2));
}

EdgeMask detect_edges(const Raster& image, const Raster& cloth_mask, double threshold) {
  require_rgb_and_mask(image, cloth_mask);
  const int w = image.width();
  const int h = image.height();
  std::vector<double> luma(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      luma[static_cast<std::size_t>(y) * w + x] =
          0.299 * image.at(x, y, 0) + 0.587 * image.at(x, y, 1) + 0.114 * image.at(x, y, 2);
    }
  }
  auto L = [&](int x, int y) {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    return luma[static_cast<std::size_t>(y) * w + x];
  };
  EdgeMask edges{Raster(w, h, 1, 0)};
  const double threshold_sq = threshold * threshold;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (cloth_mask.at(x, y, 0) == 0) continue;
      bool boundary = !in_mask(cloth_mask, x - 1, y) || !in_mask(cloth_mask, x + 1, y) ||
                      !in_mask(cloth_mask, x, y - 1) || !in_mask(cloth_mask, x, y + 1);
      bool strong = false;
      if (!boundary) {
        double gx = (L(x + 1, y - 1) + 2 * L(x + 1, y) + L(x + 1, y + 1)) -
                    (L(x - 1, y - 1) + 2 * L(x - 1, y) + L(x - 1, y + 1));
        double gy = (L(x - 1, y + 1) + 2 * L(x, y + 1) + L(x + 1, y + 1)) -
                    (L(x - 1, y - 1) + 2 * L(x, y - 1) + L(x + 1, y - 1));
        strong = gx * gx + gy * gy > threshold_sq;
      }
      if (boundary || strong) edges.mask.at(x, y, 0) = 255;
    }
  }
  return edges;
}

Raster recolor(const Raster& image, const Raster& cloth_mask, const EdgeMask& edges,
               const RecolorParams& params) {
  require_rgb_and_mask(image, cloth_mask);
  if (!image.same_size(edges.mask) || edges.mask.channels() != 1) {
    throw ValidationError("edge mask dimensions differ from image");
  }
  const std::array<int, 3> offset = {params.target_color.r - params.main_color.r,
                                     params.target_color.g - params.main_color.g,
                                     params.target_color.b - params.main_color.b};
  Raster out = image;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (cloth_mask.at(x, y, 0) == 0 || edges.mask.at(x, y, 0) != 0) continue;
      for (int c = 0; c < 3; ++c) {
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(image.at(x, y, c) + offset[c], 0, 255));
      }
    }
  }
  return out;
}

}  // namespace mycloth::cloth_edit
