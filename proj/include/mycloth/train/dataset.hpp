#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mycloth/design/raster.hpp"
#include "mycloth/design/types.hpp"
#include "mycloth/tryon/sample.hpp"

namespace mycloth::train {

enum class Split { kTrain, kTest };

std::string to_string(Split split);
Split parse_split(const std::string& text);  // "train" | "test"

struct PairEntry {
  std::string person;  // file name under <split>/image
  std::string cloth;   // file name under <split>/cloth
};

// Geometry a toy sample was drawn from; lets tests rebuild y_g independently.
struct ToyLayout {
  design::Rect cloth_rect;  // garment inside the cloth image
  design::Rect torso_rect;  // where it lands on the person
  design::Raster body;      // person render without the garment (RGB)
  design::Raster cloth;     // cloth image (RGB)
};

// Either an on-disk VITON split (samples decoded on demand) or an in-memory
// procedural set.
class DatasetSplit {
 public:
  std::filesystem::path root;
  Split split = Split::kTrain;
  int height = 0;
  int width = 0;
  int pose_channels = 0;
  std::vector<PairEntry> pairs;

  std::vector<tryon::TryOnSample> samples;  // in-memory sets only
  std::vector<ToyLayout> toy_layouts;

  std::size_t size() const { return in_memory() ? samples.size() : pairs.size(); }
  bool in_memory() const { return !samples.empty(); }
  // Throws LoadError naming the failing file.
  tryon::TryOnSample load(std::size_t index) const;
};

inline constexpr int kVitonHeight = 256;
inline constexpr int kVitonWidth = 192;
inline constexpr int kVitonKeypoints = 18;
inline constexpr int kToySize = 64;
inline constexpr int kToyPoseChannels = 3;

// Pair list "<root>/<split>_pairs.txt": two whitespace-separated names per
// line; blank lines and '#' comments are skipped. Throws ParseError with the
// 1-based line number for malformed lines, LoadError for any missing file.
DatasetSplit load_viton(const std::filesystem::path& root, Split split);

// Parses pair list text. `source` is used in error messages.
std::vector<PairEntry> parse_pair_list(const std::string& text, const std::string& source);

// n procedurally drawn 64x64 samples: striped garment on a plain cloth
// canvas, a stick figure wearing it on the torso, three pose channels, and
// the exact composite as ground truth. Deterministic in (n, seed).
DatasetSplit make_toy_dataset(int n, std::uint64_t seed);

}  // namespace mycloth::train
