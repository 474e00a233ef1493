#include "kpbench/image.hpp"

#include <limits>
#include <string>

#include "kpbench/error.hpp"

namespace kpbench {
namespace {

void check_dims(int width, int height) {
  if (width < 1 || height < 1) {
    throw DomainError("image dimensions must be >= 1, got " +
                      std::to_string(width) + "x" + std::to_string(height));
  }
}

void check_same_shape(const RgbImage& a, const RgbImage& b) {
  if (!a.same_shape(b)) throw UsageError("images differ in shape");
}

}  // namespace

RgbImage::RgbImage(int width, int height, std::uint8_t fill)
    : width_(width), height_(height) {
  check_dims(width, height);
  data_.assign(pixel_count() * kChannels, fill);
}

RgbImage::RgbImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_dims(width, height);
  if (data_.size() != pixel_count() * kChannels) {
    throw DomainError("image buffer holds " + std::to_string(data_.size()) +
                      " samples, expected " +
                      std::to_string(pixel_count() * kChannels));
  }
}

double mean_abs_diff(const RgbImage& a, const RgbImage& b) {
  check_same_shape(a, b);
  const auto lhs = a.data();
  const auto rhs = b.data();
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    total += static_cast<std::uint64_t>(lhs[i] > rhs[i] ? lhs[i] - rhs[i] : rhs[i] - lhs[i]);
  }
  return static_cast<double>(total) / static_cast<double>(lhs.size());
}

double psnr(const RgbImage& a, const RgbImage& b) {
  check_same_shape(a, b);
  const auto lhs = a.data();
  const auto rhs = b.data();
  std::uint64_t sq = 0;
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    const int d = int{lhs[i]} - int{rhs[i]};
    sq += static_cast<std::uint64_t>(d * d);
  }
  if (sq == 0) return std::numeric_limits<double>::infinity();
  const double mse = static_cast<double>(sq) / static_cast<double>(lhs.size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

}  // namespace kpbench
