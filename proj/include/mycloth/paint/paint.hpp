#pragma once

#include <memory>
#include <string>

#include "mycloth/design/raster.hpp"

namespace mycloth::paint {

using design::Raster;

// Instruction sent with every refinement request.
inline constexpr const char* kRefinementInstruction =
    "Rewrite the following T-shirt design theme as one detailed visual description of a print, "
    "mentioning subject, style, and color palette";

// Appended by the mock refiner: "t-shirt print design, <theme>, <suffix>".
inline constexpr const char* kMockStyleSuffix =
    "flat vector illustration, bold clean outlines, limited harmonious color palette, centered "
    "composition, isolated on a plain background";

inline constexpr int kMinPaintSide = 64;
inline constexpr int kMaxPaintSide = 2048;

struct PaintAsset {
  std::string asset_id;  // assigned by the asset store
  std::string raw_prompt;
  std::string refined_prompt;
  Raster image;  // RGBA
  std::string generator_name;
  std::string created_at;  // UTC ISO-8601
};

class PromptRefiner {
 public:
  virtual ~PromptRefiner() = default;
  virtual std::string name() const = 0;
  virtual std::string refine(const std::string& instruction, const std::string& theme) const = 0;
};

class TextToImage {
 public:
  virtual ~TextToImage() = default;
  virtual std::string name() const = 0;
  // Returns RGB or RGBA at the requested size.
  virtual Raster generate(const std::string& prompt, int width, int height, std::uint64_t seed) const = 0;
};

// Deterministic template expansion; no network.
class MockPromptRefiner final : public PromptRefiner {
 public:
  std::string name() const override { return "mock-refiner"; }
  std::string refine(const std::string& instruction, const std::string& theme) const override;
};

// Value-noise print colored by a seed-derived palette with a circular alpha
// vignette. Same (prompt, size, seed) gives identical bytes.
class MockTextToImage final : public TextToImage {
 public:
  std::string name() const override { return "mock-diffusion"; }
  Raster generate(const std::string& prompt, int width, int height, std::uint64_t seed) const override;
};

// Trims whitespace and rejects empty themes with ValidationError.
std::string refine_prompt(const std::string& raw_prompt, const PromptRefiner& refiner);

// Seeds the generator with a stable hash of the refined prompt. The returned
// asset has an empty asset_id until stored.
PaintAsset generate_paint(const std::string& raw_prompt, const std::string& refined_prompt,
                          const TextToImage& t2i, int width, int height);

}  // namespace mycloth::paint
