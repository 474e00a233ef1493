#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kpbench/image.hpp"

namespace kpbench {

// String-keyed entry points for foreign-language wrappers. Outputs are
// byte-identical to the enum-based API for the same inputs.

// Corruption kind names in column order.
std::vector<std::string> corruption_kinds();

// Options (all optional): "image_id" (int, default 0), "profile" (string),
// "noise_gain" (number), "mask_fill" (0..255), "keypoints" ([[x, y, v], ...]).
// Unknown option keys throw ConfigError. "mask" without "keypoints" throws
// UsageError.
RgbImage apply_named(const RgbImage& img, std::string_view kind, int severity,
                     std::uint64_t global_seed,
                     const nlohmann::json& options = nlohmann::json::object());

// Options: "probability" (number), "ranges" (same document as
// AugmentationRanges::apply_overrides).
RgbImage apply_pipeline_named(const RgbImage& img, const std::vector<std::string>& sets,
                              std::uint64_t seed,
                              const nlohmann::json& options = nlohmann::json::object());

}  // namespace kpbench
