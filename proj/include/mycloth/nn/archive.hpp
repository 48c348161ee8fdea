#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mycloth/nn/module.hpp"

namespace mycloth::nn {

// Binary tensor archive: "MYCT", u32 version, u64 entry count, then per entry
// u32 name length, name bytes, u32 rank, i32 dims, f64 values. Little-endian.
std::vector<std::uint8_t> encode_tensors(const NamedTensors& tensors);
NamedTensors decode_tensors(const std::vector<std::uint8_t>& bytes);

void save_tensors(const std::filesystem::path& path, const NamedTensors& tensors);
NamedTensors load_tensors(const std::filesystem::path& path);

}  // namespace mycloth::nn
