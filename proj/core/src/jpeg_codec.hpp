#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kpbench/image.hpp"

namespace kpbench::detail {

std::vector<std::uint8_t> encode_jpeg(const RgbImage& image, int quality);
RgbImage decode_jpeg(std::span<const std::uint8_t> bytes);

}  // namespace kpbench::detail
