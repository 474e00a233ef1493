#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace kpbench {

// 8-bit RGB raster, row-major, channels interleaved. Width and height are
// always >= 1 and data().size() == width * height * 3.
class RgbImage {
 public:
  static constexpr int kChannels = 3;

  RgbImage(int width, int height, std::uint8_t fill = 0);
  RgbImage(int width, int height, std::vector<std::uint8_t> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::span<std::uint8_t> data() noexcept { return data_; }

  std::uint8_t& at(int x, int y, int c) noexcept { return data_[index(x, y, c)]; }
  std::uint8_t at(int x, int y, int c) const noexcept { return data_[index(x, y, c)]; }

  std::uint8_t* pixel(int x, int y) noexcept { return data_.data() + index(x, y, 0); }
  const std::uint8_t* pixel(int x, int y) const noexcept {
    return data_.data() + index(x, y, 0);
  }

  bool same_shape(const RgbImage& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) * kChannels + static_cast<std::size_t>(c);
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> data_;
};

// Round half away from zero and clamp into [0, 255].
inline std::uint8_t to_u8(double value) noexcept {
  const double r = std::round(value);
  if (!(r > 0.0)) return 0;
  if (r >= 255.0) return 255;
  return static_cast<std::uint8_t>(r);
}

inline int clamp_index(int i, int size) noexcept {
  return i < 0 ? 0 : (i >= size ? size - 1 : i);
}

// Mean absolute per-sample difference; images must share a shape.
double mean_abs_diff(const RgbImage& a, const RgbImage& b);

// Peak signal-to-noise ratio in dB (infinity for identical images).
double psnr(const RgbImage& a, const RgbImage& b);

}  // namespace kpbench
