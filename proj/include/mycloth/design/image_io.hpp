#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mycloth/design/raster.hpp"

namespace mycloth::design {

// PNG encoding is deterministic for a given raster: fixed compression level,
// no timestamps or text chunks.
std::vector<std::uint8_t> encode_png(const Raster& raster);
Raster decode_png(std::span<const std::uint8_t> bytes);

// Decodes PNG or baseline JPEG, detected from the leading signature bytes.
Raster decode_image(std::span<const std::uint8_t> bytes);

Raster read_image(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Raster& raster);

// Loads a single-channel {0,255} mask. RGB/RGBA files are reduced to their
// first channel; any value other than 0/255 is rejected.
Raster read_mask(const std::filesystem::path& path);

// Raw class indices of a palette or 8-bit grayscale PNG (one channel).
Raster read_label_map(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace mycloth::design
