#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "kpbench/image.hpp"

namespace kpbench {

enum class ImageFormat { kPng, kJpeg };

// Sniffs the container from its magic bytes; throws IoError otherwise.
ImageFormat detect_format(std::span<const std::uint8_t> bytes);

RgbImage decode_image(std::span<const std::uint8_t> bytes);
RgbImage read_image(const std::filesystem::path& path);

// Lossless PNG encoding with fixed settings, so equal pixels give equal bytes.
std::vector<std::uint8_t> encode_png(const RgbImage& image);

// Baseline JPEG, 4:2:0 chroma subsampling, Annex K tables scaled with the
// libjpeg quality convention, integer (islow) DCT.
std::vector<std::uint8_t> encode_jpeg(const RgbImage& image, int quality);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it into place, so readers
// never observe a half-written file.
void write_file_atomic(const std::filesystem::path& path,
                       std::span<const std::uint8_t> bytes);

void write_png(const std::filesystem::path& path, const RgbImage& image);

}  // namespace kpbench
