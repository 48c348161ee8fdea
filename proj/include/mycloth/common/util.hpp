#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mycloth {

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);

// First 8 bytes of SHA-256, big-endian. Stable across platforms and runs.
std::uint64_t stable_hash64(std::string_view text);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

// Cryptographically random hex string of byte_count * 2 characters.
std::string random_hex(std::size_t byte_count);

// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_now_iso8601();

// Writes to a sibling temporary file, then renames over `path`.
void atomic_write(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void atomic_write(const std::filesystem::path& path, std::string_view text);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace mycloth
