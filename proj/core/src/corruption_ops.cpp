#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "color.hpp"
#include "kpbench/corruption.hpp"
#include "kpbench/error.hpp"
#include "kpbench/image_io.hpp"
#include "kpbench/random.hpp"

namespace kpbench {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

// Stream used for the black/white choice of impulse pixels; independent of the
// position stream so the positions can be re-derived on their own.
constexpr std::uint64_t kImpulseColorSalt = 0x1F0A3C5E7B9D2468ULL;

}  // namespace

double motion_blur_angle_degrees(std::uint64_t seed) {
  Rng rng(seed);
  return -45.0 + 90.0 * rng.uniform();
}

RgbImage motion_blur(const RgbImage& img, int radius, double sigma, std::uint64_t seed) {
  require(radius >= 0, "motion blur radius must be >= 0");
  require(sigma >= 0.0, "motion blur sigma must be >= 0");
  if (radius == 0) return img;

  const double angle = motion_blur_angle_degrees(seed) * std::numbers::pi / 180.0;
  const double cos_a = std::cos(angle);
  const double sin_a = std::sin(angle);

  struct Tap {
    int dx;
    int dy;
    double weight;
  };
  std::vector<Tap> taps;
  taps.reserve(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    double w = 0.0;
    if (sigma > 0.0) {
      w = std::exp(-static_cast<double>(k) * k / (2.0 * sigma * sigma));
    } else {
      w = (k == 0) ? 1.0 : 0.0;
    }
    if (w == 0.0) continue;
    taps.push_back({static_cast<int>(std::lround(k * cos_a)),
                    static_cast<int>(std::lround(k * sin_a)), w});
    total += w;
  }
  for (auto& t : taps) t.weight /= total;

  const int w = img.width();
  const int h = img.height();
  RgbImage out(w, h);
  std::vector<double> acc(static_cast<std::size_t>(w) * 3);
  for (int y = 0; y < h; ++y) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (const auto& tap : taps) {
      const std::uint8_t* row = img.pixel(0, clamp_index(y + tap.dy, h));
      for (int x = 0; x < w; ++x) {
        const std::uint8_t* src = row + 3 * clamp_index(x + tap.dx, w);
        double* dst = acc.data() + 3 * x;
        dst[0] += tap.weight * src[0];
        dst[1] += tap.weight * src[1];
        dst[2] += tap.weight * src[2];
      }
    }
    std::uint8_t* dst = out.pixel(0, y);
    for (std::size_t i = 0; i < acc.size(); ++i) dst[i] = to_u8(acc[i]);
  }
  return out;
}

RgbImage gaussian_noise(const RgbImage& img, double sigma, double gain, std::uint64_t seed) {
  require(sigma >= 0.0, "gaussian noise sigma must be >= 0");
  require(gain > 0.0, "gaussian noise gain must be > 0");
  if (sigma == 0.0) return img;
  const double scale = gain * sigma;
  Rng rng(seed);
  RgbImage out = img;
  for (auto& sample : out.data()) {
    sample = to_u8(static_cast<double>(sample) + scale * rng.normal());
  }
  return out;
}

std::size_t impulse_count(std::size_t pixel_count, double proportion_percent) {
  require(proportion_percent >= 0.0 && proportion_percent <= 100.0,
          "impulse proportion must be in [0, 100]");
  const double n = std::floor(proportion_percent * static_cast<double>(pixel_count) / 100.0);
  return std::min(pixel_count, static_cast<std::size_t>(n));
}

std::vector<std::size_t> select_impulse_positions(std::size_t pixel_count, std::size_t count,
                                                  std::uint64_t seed) {
  require(count <= pixel_count, "impulse count exceeds pixel count");
  std::vector<std::size_t> pool(pixel_count);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pixel_count - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

RgbImage impulse_noise(const RgbImage& img, double proportion_percent, std::uint64_t seed) {
  const std::size_t count = impulse_count(img.pixel_count(), proportion_percent);
  if (count == 0) return img;
  const auto positions = select_impulse_positions(img.pixel_count(), count, seed);
  Rng colors(splitmix64(seed ^ kImpulseColorSalt));
  RgbImage out = img;
  auto data = out.data();
  for (std::size_t p : positions) {
    const std::uint8_t value = (colors.next_u64() >> 63) != 0 ? 255 : 0;
    data[3 * p] = value;
    data[3 * p + 1] = value;
    data[3 * p + 2] = value;
  }
  return out;
}

namespace {

// Source-pixel overlaps of each destination cell along one axis, in units of
// 1/dst_size source pixels so all weights are integers.
struct AxisWeights {
  std::vector<std::size_t> begin;   // first contributing source index per dst
  std::vector<std::vector<std::int64_t>> weights;
};

AxisWeights area_weights(int src_size, int dst_size) {
  AxisWeights out;
  out.begin.resize(static_cast<std::size_t>(dst_size));
  out.weights.resize(static_cast<std::size_t>(dst_size));
  for (int d = 0; d < dst_size; ++d) {
    const std::int64_t lo = static_cast<std::int64_t>(d) * src_size;
    const std::int64_t hi = lo + src_size;
    const std::int64_t first = lo / dst_size;
    const std::int64_t last = (hi - 1) / dst_size;
    out.begin[static_cast<std::size_t>(d)] = static_cast<std::size_t>(first);
    for (std::int64_t s = first; s <= last; ++s) {
      const std::int64_t s_lo = s * dst_size;
      const std::int64_t s_hi = s_lo + dst_size;
      out.weights[static_cast<std::size_t>(d)].push_back(std::min(hi, s_hi) -
                                                         std::max(lo, s_lo));
    }
  }
  return out;
}

int scaled_size(int size, double ratio_percent) {
  // Guard against 1e-15 noise pushing an exact product over an integer.
  const double exact = static_cast<double>(size) * ratio_percent / 100.0;
  return std::max(1, static_cast<int>(std::ceil(exact - 1e-9)));
}

}  // namespace

RgbImage pixelate(const RgbImage& img, double ratio_percent) {
  require(ratio_percent > 0.0 && ratio_percent <= 100.0, "pixelate ratio must be in (0, 100]");
  const int w = img.width();
  const int h = img.height();
  const int dw = std::min(w, scaled_size(w, ratio_percent));
  const int dh = std::min(h, scaled_size(h, ratio_percent));
  if (dw == w && dh == h) return img;

  const AxisWeights wx = area_weights(w, dw);
  const AxisWeights wy = area_weights(h, dh);
  const std::int64_t denom = static_cast<std::int64_t>(w) * h;

  RgbImage small(dw, dh);
  for (int dy = 0; dy < dh; ++dy) {
    const auto& ys = wy.weights[static_cast<std::size_t>(dy)];
    const std::size_t y0 = wy.begin[static_cast<std::size_t>(dy)];
    for (int dx = 0; dx < dw; ++dx) {
      const auto& xs = wx.weights[static_cast<std::size_t>(dx)];
      const std::size_t x0 = wx.begin[static_cast<std::size_t>(dx)];
      std::int64_t sum[3] = {0, 0, 0};
      for (std::size_t j = 0; j < ys.size(); ++j) {
        for (std::size_t i = 0; i < xs.size(); ++i) {
          const std::uint8_t* p = img.pixel(static_cast<int>(x0 + i), static_cast<int>(y0 + j));
          const std::int64_t wgt = xs[i] * ys[j];
          sum[0] += wgt * p[0];
          sum[1] += wgt * p[1];
          sum[2] += wgt * p[2];
        }
      }
      std::uint8_t* q = small.pixel(dx, dy);
      for (int c = 0; c < 3; ++c) {
        // Round half up; all terms are non-negative.
        q[c] = static_cast<std::uint8_t>((2 * sum[c] + denom) / (2 * denom));
      }
    }
  }

  // Nearest neighbour by pixel centre.
  RgbImage out(w, h);
  for (int y = 0; y < h; ++y) {
    const int sy = static_cast<int>((2 * static_cast<std::int64_t>(y) + 1) * dh / (2 * h));
    for (int x = 0; x < w; ++x) {
      const int sx = static_cast<int>((2 * static_cast<std::int64_t>(x) + 1) * dw / (2 * w));
      std::copy_n(small.pixel(sx, sy), 3, out.pixel(x, y));
    }
  }
  return out;
}

RgbImage jpeg_compress(const RgbImage& img, int quality) {
  require(quality >= 1 && quality <= 100, "JPEG quality must be in [1, 100]");
  return decode_image(encode_jpeg(img, quality));
}

RgbImage color_quant(const RgbImage& img, int bits) {
  require(bits >= 1 && bits <= 8, "color quantization bits must be in [1, 8]");
  const auto mask = static_cast<std::uint8_t>(~((1u << (8 - bits)) - 1u));
  RgbImage out = img;
  for (auto& sample : out.data()) sample &= mask;
  return out;
}

RgbImage brightness(const RgbImage& img, double delta_v) {
  require(delta_v >= 0.0 && delta_v <= 1.0, "brightness delta must be in [0, 1]");
  RgbImage out(img.width(), img.height());
  const auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); i += 3) {
    auto hsv = detail::rgb_to_hsv({src[i] / 255.0, src[i + 1] / 255.0, src[i + 2] / 255.0});
    hsv.v = std::min(1.0, hsv.v + delta_v);
    const auto rgb = detail::hsv_to_rgb(hsv);
    dst[i] = to_u8(rgb.r * 255.0);
    dst[i + 1] = to_u8(rgb.g * 255.0);
    dst[i + 2] = to_u8(rgb.b * 255.0);
  }
  return out;
}

RgbImage darkness(const RgbImage& img, double gamma) {
  require(gamma > 0.0 && gamma <= 1.0, "darkness gamma must be in (0, 1]");
  std::array<std::uint8_t, 256> lut{};
  for (int v = 0; v < 256; ++v) lut[static_cast<std::size_t>(v)] = to_u8(gamma * v);
  RgbImage out = img;
  for (auto& sample : out.data()) sample = lut[sample];
  return out;
}

RgbImage contrast(const RgbImage& img, double factor) {
  require(factor > 0.0 && factor <= 1.0, "contrast factor must be in (0, 1]");
  const auto src = img.data();
  std::array<std::uint64_t, 3> sums{};
  for (std::size_t i = 0; i < src.size(); ++i) sums[i % 3] += src[i];
  std::array<std::array<std::uint8_t, 256>, 3> lut{};
  for (std::size_t c = 0; c < 3; ++c) {
    const double mean = static_cast<double>(sums[c]) / static_cast<double>(img.pixel_count());
    for (int v = 0; v < 256; ++v) {
      lut[c][static_cast<std::size_t>(v)] = to_u8((v - mean) * factor + mean);
    }
  }
  RgbImage out = img;
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = lut[i % 3][dst[i]];
  return out;
}

RgbImage keypoint_mask(const RgbImage& img, std::span<const MaskTarget> targets, int size,
                       std::uint8_t fill) {
  require(size >= 0, "mask size must be >= 0");
  RgbImage out = img;
  if (size == 0) return out;
  const int w = img.width();
  const int h = img.height();
  for (const auto& t : targets) {
    if (t.v <= 0) continue;
    const int x0 = std::max(0, t.x - size / 2);
    const int y0 = std::max(0, t.y - size / 2);
    const int x1 = std::min(w, t.x - size / 2 + size);
    const int y1 = std::min(h, t.y - size / 2 + size);
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        std::uint8_t* p = out.pixel(x, y);
        p[0] = p[1] = p[2] = fill;
      }
    }
  }
  return out;
}

}  // namespace kpbench
