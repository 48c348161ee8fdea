#include "mycloth/paint/paint.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <random>
#include <vector>

#include "mycloth/common/error.hpp"
#include "mycloth/common/util.hpp"

namespace mycloth::paint {

namespace {

std::string trim(const std::string& text) {
  auto begin = std::find_if_not(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); });
  auto end = std::find_if_not(text.rbegin(), text.rend(), [](unsigned char c) { return std::isspace(c); }).base();
  return begin < end ? std::string(begin, end) : std::string();
}

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

struct ValueNoise {
  int cells;
  std::vector<double> lattice;

  ValueNoise(int cells_, std::mt19937_64& rng) : cells(cells_), lattice((cells_ + 1) * (cells_ + 1)) {
    for (double& v : lattice) v = unit(rng);
  }

  double at(double u, double v) const {
    double x = u * cells;
    double y = v * cells;
    int x0 = std::min(static_cast<int>(x), cells - 1);
    int y0 = std::min(static_cast<int>(y), cells - 1);
    double tx = smoothstep(x - x0);
    double ty = smoothstep(y - y0);
    auto L = [&](int i, int j) { return lattice[static_cast<std::size_t>(j) * (cells + 1) + i]; };
    double top = L(x0, y0) * (1 - tx) + L(x0 + 1, y0) * tx;
    double bottom = L(x0, y0 + 1) * (1 - tx) + L(x0 + 1, y0 + 1) * tx;
    return top * (1 - ty) + bottom * ty;
  }
};

}  // namespace

std::string MockPromptRefiner::refine(const std::string& /*instruction*/, const std::string& theme) const {
  return "t-shirt print design, " + theme + ", " + kMockStyleSuffix;
}

Raster MockTextToImage::generate(const std::string& prompt, int width, int height, std::uint64_t seed) const {
  // callers usually derive seed from the prompt, so xor would cancel
  const std::uint64_t h = stable_hash64(prompt);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  std::mt19937_64 rng(seq);
  std::array<std::array<double, 3>, 4> palette{};
  for (auto& color : palette) {
    for (double& c : color) c = 40.0 + 215.0 * unit(rng);
  }
  ValueNoise coarse(4, rng);
  ValueNoise fine(11, rng);
  Raster out(width, height, 4, 0);
  const double cx = width / 2.0;
  const double cy = height / 2.0;
  const double radius = 0.5 * std::min(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double u = (x + 0.5) / width;
      double v = (y + 0.5) / height;
      double n = std::clamp(0.7 * coarse.at(u, v) + 0.3 * fine.at(u, v), 0.0, 1.0);
      double pos = n * 3.0;
      int i = std::min(static_cast<int>(pos), 2);
      double t = pos - i;
      for (int c = 0; c < 3; ++c) {
        double value = palette[i][c] * (1 - t) + palette[i + 1][c] * t;
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
      }
      double r = std::hypot(x + 0.5 - cx, y + 0.5 - cy) / radius;
      double alpha = r <= 0.75 ? 1.0 : r >= 1.0 ? 0.0 : 1.0 - smoothstep((r - 0.75) / 0.25);
      out.at(x, y, 3) = static_cast<std::uint8_t>(std::lround(alpha * 255.0));
    }
  }
  return out;
}

std::string refine_prompt(const std::string& raw_prompt, const PromptRefiner& refiner) {
  std::string theme = trim(raw_prompt);
  if (theme.empty()) {
    throw ValidationError("prompt must not be empty", {{"prompt", "must not be empty"}});
  }
  std::string refined = trim(refiner.refine(kRefinementInstruction, theme));
  if (refined.empty()) {
    throw BackendUnavailableError("prompt refinement failed", refiner.name() + " returned an empty prompt");
  }
  return refined;
}

PaintAsset generate_paint(const std::string& raw_prompt, const std::string& refined_prompt,
                          const TextToImage& t2i, int width, int height) {
  if (trim(refined_prompt).empty()) {
    throw ValidationError("refined prompt must not be empty", {{"prompt", "must not be empty"}});
  }
  auto check_side = [](int v, const char* field) {
    if (v < kMinPaintSide || v > kMaxPaintSide) {
      throw ValidationError("paint size out of range", {{field, "must be in [64, 2048]"}});
    }
  };
  check_side(width, "width");
  check_side(height, "height");
  Raster image = t2i.generate(refined_prompt, width, height, stable_hash64(refined_prompt));
  if (image.width() != width || image.height() != height) {
    image = design::resize_bilinear(image, width, height);
  }
  // Diffusion backends return RGB; prints without matting are fully opaque.
  image = design::to_rgba(image);
  PaintAsset asset;
  asset.raw_prompt = raw_prompt;
  asset.refined_prompt = refined_prompt;
  asset.image = std::move(image);
  asset.generator_name = t2i.name();
  asset.created_at = utc_now_iso8601();
  return asset;
}

}  // namespace mycloth::paint
