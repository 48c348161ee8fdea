#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mycloth/design/raster.hpp"
#include "mycloth/design/types.hpp"
#include "mycloth/tryon/sample.hpp"

namespace mycloth::service {

// <dir>/manifest.json:
//   {"avatars": [{"id": "a1", "display_name": "...", "person": "a1/person.png",
//                 "pose": "a1/pose.myct", "agnostic": "a1/agnostic.png"}]}
// pose.myct is a tensor archive with one (P, H, W) entry named "pose".
struct AvatarSpec {
  std::string avatar_id;
  std::string display_name;
  std::filesystem::path person_image;
  std::filesystem::path pose_map;
  std::filesystem::path agnostic_image;
  int width = 0;
  int height = 0;
  int pose_channels = 0;
};

class AvatarGallery {
 public:
  AvatarGallery() = default;
  // Missing directory or manifest: empty gallery. Any listed file missing,
  // or mismatched dimensions, throws ConfigError.
  static AvatarGallery load(const std::filesystem::path& dir);

  const std::vector<AvatarSpec>& avatars() const { return avatars_; }
  const AvatarSpec& find(const std::string& avatar_id) const;  // NotFoundError

 private:
  std::vector<AvatarSpec> avatars_;
};

// Person-side inputs of a try-on sample; cloth is left empty.
tryon::TryOnSample load_avatar_inputs(const AvatarSpec& avatar);

// Writes three toy avatars (64x64, 3 pose channels) in gallery layout.
void write_seed_gallery(const std::filesystem::path& dir);

// Where the garment sits inside a cloth image of the given size: the middle
// half horizontally, rows [3h/16, 13h/16).
design::Rect cloth_frame(int width, int height);

// Crops the rendered garment to the bounding box of its mask and scales it
// into cloth_frame() on a white canvas; pixels outside the mask stay white.
design::Raster garment_cloth_image(const design::Raster& render, const design::Raster& cloth_mask, int width,
                                   int height);

}  // namespace mycloth::service
