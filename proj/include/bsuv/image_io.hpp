#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "bsuv/types.hpp"

namespace bsuv {

namespace fs = std::filesystem;

/// 8-bit single-channel raster as stored on disk (ground truth, masks, ROI).
struct GrayImage8 {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;
  friend bool operator==(const GrayImage8&, const GrayImage8&) = default;
};

// Ground-truth byte values (CDNet-2014 file conventions).
namespace label_code {
inline constexpr std::uint8_t kBackground = 0;
inline constexpr std::uint8_t kHardShadow = 50;
inline constexpr std::uint8_t kOutsideRoi = 85;
inline constexpr std::uint8_t kUnknownMotion = 170;
inline constexpr std::uint8_t kForeground = 255;
}  // namespace label_code

/// Throws UnknownLabelValue for any byte outside the encoding table.
LabelMap decode_label_map(const GrayImage8& image);
GrayImage8 encode_label_map(const LabelMap& labels);

/// 1 -> 255, 0 -> 0.
GrayImage8 encode_mask(const BinaryMask& mask);
/// Values >= 128 decode to 1 so masks written by other tools ingest too.
BinaryMask decode_mask(const GrayImage8& image);

/// Interleaved 8-bit RGB -> unit interval (v / 255).
ColorFrame color_from_bytes(int height, int width, std::span<const std::uint8_t> rgb);

// Disk codecs. Readers throw MissingFrame when the file is absent and
// CorruptImage when it cannot be decoded.
ColorFrame read_color_frame(const fs::path& path);
GrayImage8 read_gray8(const fs::path& path);
void write_gray8(const fs::path& path, const GrayImage8& image);

/// Single-channel 16-bit PNG, value = round(p * 65535).
void write_probability16(const fs::path& path, const ProbabilityMap& map);
ProbabilityMap read_probability16(const fs::path& path);

/// Three-channel 16-bit PNG, value = round(v * 65535). Exact for frames that
/// originate from 8-bit data.
void write_color16(const fs::path& path, const ColorFrame& frame);
ColorFrame read_color16(const fs::path& path);

/// Writes an 8-bit RGB PNG/JPEG (used by synthetic data generators).
void write_color8(const fs::path& path, const ColorFrame& frame);

}  // namespace bsuv
