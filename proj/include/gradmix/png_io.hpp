#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "gradmix/raster.hpp"

namespace gradmix::png {

// Encoder settings are fixed (no interlacing, no filtering, zlib level 6,
// no ancillary chunks) so identical pixels always produce identical bytes.

std::vector<std::uint8_t> encode_rgb(const RgbImage& image);
std::vector<std::uint8_t> encode_gray16(const Raster<std::uint16_t>& image);

/// Decodes any 8-bit PNG to RGB (gray is replicated, alpha is dropped).
RgbImage decode_rgb(std::span<const std::uint8_t> bytes);
/// Decodes a single-channel PNG; 8-bit samples are widened.
Raster<std::uint16_t> decode_gray16(std::span<const std::uint8_t> bytes);

RgbImage read_rgb(const std::filesystem::path& path);
Raster<std::uint16_t> read_gray16(const std::filesystem::path& path);
void write_rgb(const std::filesystem::path& path, const RgbImage& image);
void write_gray16(const std::filesystem::path& path,
                  const Raster<std::uint16_t>& image);

}  // namespace gradmix::png

namespace gradmix::io {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path,
                       std::span<const std::uint8_t> bytes);
void write_text_atomic(const std::filesystem::path& path,
                       const std::string& text);

}  // namespace gradmix::io
