#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "color.hpp"
#include "kpbench/augmentation.hpp"
#include "kpbench/corruption.hpp"

namespace kpbench {
namespace {

using detail::Hsv;
using detail::Rgb;

class Sampler {
 public:
  Sampler(const AugmentationRanges& ranges, TransformId id, Rng& rng)
      : ranges_(ranges), prefix_(std::string(transform_name(id)) + "."), rng_(rng) {}

  double real(const char* param) {
    const auto& r = ranges_.at(prefix_ + param);
    return rng_.uniform(r.lo, r.hi);
  }
  int integer(const char* param) {
    const auto& r = ranges_.at(prefix_ + param);
    return rng_.uniform_int(static_cast<int>(std::lround(r.lo)), static_cast<int>(std::lround(r.hi)));
  }

 private:
  const AugmentationRanges& ranges_;
  std::string prefix_;
  Rng& rng_;
};

// Per-sample map through a double-valued function, rounded and clipped.
template <typename F>
RgbImage map_pixels(const RgbImage& img, F&& f) {
  RgbImage out = img;
  auto data = out.data();
  for (std::size_t i = 0; i < data.size(); i += 3) {
    Rgb p{static_cast<double>(data[i]), static_cast<double>(data[i + 1]),
          static_cast<double>(data[i + 2])};
    p = f(p);
    data[i] = to_u8(p.r);
    data[i + 1] = to_u8(p.g);
    data[i + 2] = to_u8(p.b);
  }
  return out;
}

RgbImage lut_map(const RgbImage& img, const std::array<std::uint8_t, 256>& lut) {
  RgbImage out = img;
  for (auto& v : out.data()) v = lut[v];
  return out;
}

// Separable convolution with a symmetric kernel, replicate border.
RgbImage separable(const RgbImage& img, const std::vector<double>& kernel) {
  const int w = img.width();
  const int h = img.height();
  const int r = static_cast<int>(kernel.size() / 2);
  std::vector<double> tmp(static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int k = -r; k <= r; ++k) {
          acc += kernel[static_cast<std::size_t>(k + r)] * img.at(clamp_index(x + k, w), y, c);
        }
        tmp[(static_cast<std::size_t>(y) * w + x) * 3 + c] = acc;
      }
    }
  }
  RgbImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int k = -r; k <= r; ++k) {
          acc += kernel[static_cast<std::size_t>(k + r)] *
                 tmp[(static_cast<std::size_t>(clamp_index(y + k, h)) * w + x) * 3 + c];
        }
        out.at(x, y, c) = to_u8(acc);
      }
    }
  }
  return out;
}

RgbImage box_blur(const RgbImage& img, int radius) {
  if (radius <= 0) return img;
  const auto n = static_cast<std::size_t>(2 * radius + 1);
  return separable(img, std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

RgbImage gaussian_blur(const RgbImage& img, double sigma) {
  if (!(sigma > 0.0)) return img;
  const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(static_cast<std::size_t>(2 * r + 1));
  double total = 0.0;
  for (int k = -r; k <= r; ++k) {
    const double v = std::exp(-static_cast<double>(k) * k / (2.0 * sigma * sigma));
    kernel[static_cast<std::size_t>(k + r)] = v;
    total += v;
  }
  for (auto& v : kernel) v /= total;
  return separable(img, kernel);
}

RgbImage median_blur(const RgbImage& img, int radius) {
  if (radius <= 0) return img;
  const int w = img.width();
  const int h = img.height();
  RgbImage out(w, h);
  std::vector<std::uint8_t> window;
  window.reserve(static_cast<std::size_t>((2 * radius + 1) * (2 * radius + 1)));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        window.clear();
        for (int dy = -radius; dy <= radius; ++dy) {
          for (int dx = -radius; dx <= radius; ++dx) {
            window.push_back(img.at(clamp_index(x + dx, w), clamp_index(y + dy, h), c));
          }
        }
        auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
        std::nth_element(window.begin(), mid, window.end());
        out.at(x, y, c) = *mid;
      }
    }
  }
  return out;
}

RgbImage iso_noise(const RgbImage& img, double intensity, double color_shift, Rng& rng) {
  const double luma_sigma = intensity * 25.5;
  const double chroma_sigma = color_shift * 255.0;
  return map_pixels(img, [&](Rgb p) {
    double y = detail::luma(p.r, p.g, p.b);
    double cb = -0.168736 * p.r - 0.331264 * p.g + 0.5 * p.b;
    double cr = 0.5 * p.r - 0.418688 * p.g - 0.081312 * p.b;
    y += luma_sigma * rng.normal();
    cb += chroma_sigma * rng.normal();
    cr += chroma_sigma * rng.normal();
    return Rgb{y + 1.402 * cr, y - 0.344136 * cb - 0.714136 * cr, y + 1.772 * cb};
  });
}

RgbImage color_jitter(const RgbImage& img, double brightness, double contrast_factor,
                      double saturation, double hue) {
  double mean = 0.0;
  const auto data = img.data();
  for (std::size_t i = 0; i < data.size(); i += 3) {
    mean += detail::luma(data[i], data[i + 1], data[i + 2]);
  }
  mean = mean / static_cast<double>(img.pixel_count()) * brightness;
  return map_pixels(img, [&](Rgb p) {
    p = {p.r * brightness, p.g * brightness, p.b * brightness};
    p = {(p.r - mean) * contrast_factor + mean, (p.g - mean) * contrast_factor + mean,
         (p.b - mean) * contrast_factor + mean};
    const double g = detail::luma(p.r, p.g, p.b);
    p = {g + (p.r - g) * saturation, g + (p.g - g) * saturation, g + (p.b - g) * saturation};
    p = {std::clamp(p.r, 0.0, 255.0) / 255.0, std::clamp(p.g, 0.0, 255.0) / 255.0,
         std::clamp(p.b, 0.0, 255.0) / 255.0};
    Hsv hsv = detail::rgb_to_hsv(p);
    hsv.h = std::fmod(hsv.h + hue * 6.0 + 6.0, 6.0);
    const Rgb q = detail::hsv_to_rgb(hsv);
    return Rgb{q.r * 255.0, q.g * 255.0, q.b * 255.0};
  });
}

RgbImage hsv_jitter(const RgbImage& img, double dh, double ds, double dv) {
  return map_pixels(img, [&](Rgb p) {
    Hsv hsv = detail::rgb_to_hsv({p.r / 255.0, p.g / 255.0, p.b / 255.0});
    hsv.h = std::fmod(hsv.h + dh * 6.0 + 6.0, 6.0);
    hsv.s = std::clamp(hsv.s + ds, 0.0, 1.0);
    hsv.v = std::clamp(hsv.v + dv, 0.0, 1.0);
    const Rgb q = detail::hsv_to_rgb(hsv);
    return Rgb{q.r * 255.0, q.g * 255.0, q.b * 255.0};
  });
}

RgbImage fill_rect(RgbImage img, int x0, int y0, int x1, int y1, std::uint8_t fill) {
  x0 = std::max(x0, 0);
  y0 = std::max(y0, 0);
  x1 = std::min(x1, img.width());
  y1 = std::min(y1, img.height());
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      std::uint8_t* p = img.pixel(x, y);
      p[0] = p[1] = p[2] = fill;
    }
  }
  return img;
}

RgbImage shadow_polygon(const RgbImage& img, int vertices, double size, double darkness,
                        Rng& rng) {
  const int w = img.width();
  const int h = img.height();
  const double cx = rng.uniform(0.0, w);
  const double cy = rng.uniform(0.0, h);
  const double radius = size * std::min(w, h);
  std::vector<double> angles(static_cast<std::size_t>(vertices));
  for (auto& a : angles) a = rng.uniform(0.0, 2.0 * std::numbers::pi);
  std::sort(angles.begin(), angles.end());
  std::vector<std::pair<double, double>> poly;
  for (double a : angles) {
    const double r = radius * rng.uniform(0.5, 1.0);
    poly.emplace_back(cx + r * std::cos(a), cy + r * std::sin(a));
  }
  RgbImage out = img;
  for (int y = 0; y < h; ++y) {
    const double py = y + 0.5;
    for (int x = 0; x < w; ++x) {
      const double px = x + 0.5;
      bool inside = false;
      for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const auto [xi, yi] = poly[i];
        const auto [xj, yj] = poly[j];
        if ((yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi) {
          inside = !inside;
        }
      }
      if (!inside) continue;
      std::uint8_t* p = out.pixel(x, y);
      for (int c = 0; c < 3; ++c) p[c] = to_u8(p[c] * darkness);
    }
  }
  return out;
}

}  // namespace

RgbImage apply_transform(TransformId id, const RgbImage& img, const AugmentationRanges& ranges,
                         Rng& rng) {
  Sampler s(ranges, id, rng);
  const std::uint8_t fill = ranges.fill;
  const int w = img.width();
  const int h = img.height();
  switch (id) {
    case TransformId::kBoxBlur:
      return box_blur(img, s.integer("radius"));
    case TransformId::kMedianBlur:
      return median_blur(img, s.integer("radius"));
    case TransformId::kGaussianBlur:
      return gaussian_blur(img, s.real("sigma"));
    case TransformId::kGaussianNoise: {
      const double sigma = s.real("sigma");
      return gaussian_noise(img, sigma, 1.0, rng.next_u64());
    }
    case TransformId::kIsoNoise: {
      const double intensity = s.real("intensity");
      const double shift = s.real("color_shift");
      return iso_noise(img, intensity, shift, rng);
    }
    case TransformId::kMotionBlur: {
      const int radius = s.integer("radius");
      const double sigma = s.real("sigma");
      return motion_blur(img, radius, sigma, rng.next_u64());
    }
    case TransformId::kColorJitter: {
      const double b = s.real("brightness");
      const double c = s.real("contrast");
      const double sat = s.real("saturation");
      const double hue = s.real("hue");
      return color_jitter(img, b, c, sat, hue);
    }
    case TransformId::kJpegReencode:
      return jpeg_compress(img, std::clamp(s.integer("quality"), 1, 100));
    case TransformId::kRgbShift: {
      const int dr = s.integer("shift");
      const int dg = s.integer("shift");
      const int db = s.integer("shift");
      return map_pixels(img, [&](Rgb p) { return Rgb{p.r + dr, p.g + dg, p.b + db}; });
    }
    case TransformId::kToGray:
      return map_pixels(img, [](Rgb p) {
        const double g = detail::luma(p.r, p.g, p.b);
        return Rgb{g, g, g};
      });
    case TransformId::kPixelDropout: {
      const double rate = s.real("rate");
      RgbImage out = img;
      auto data = out.data();
      for (std::size_t i = 0; i < data.size(); i += 3) {
        if (rng.bernoulli(rate)) data[i] = data[i + 1] = data[i + 2] = fill;
      }
      return out;
    }
    case TransformId::kHsvJitter: {
      const double dh = s.real("hue");
      const double ds = s.real("saturation");
      const double dv = s.real("value");
      return hsv_jitter(img, dh, ds, dv);
    }
    case TransformId::kBrightnessJitter: {
      const double delta = s.real("delta") * 255.0;
      return map_pixels(img, [&](Rgb p) { return Rgb{p.r + delta, p.g + delta, p.b + delta}; });
    }
    case TransformId::kContrastJitter:
      return contrast(img, std::clamp(s.real("factor"), 1e-6, 1.0));
    case TransformId::kGammaJitter: {
      const double gamma = s.real("gamma");
      std::array<std::uint8_t, 256> lut{};
      for (int v = 0; v < 256; ++v) {
        lut[static_cast<std::size_t>(v)] = to_u8(255.0 * std::pow(v / 255.0, gamma));
      }
      return lut_map(img, lut);
    }
    case TransformId::kShadowPolygon: {
      const int vertices = std::max(3, s.integer("vertices"));
      const double size = s.real("size");
      const double darkness = s.real("darkness");
      return shadow_polygon(img, vertices, size, darkness, rng);
    }
    case TransformId::kXyMasking: {
      const int count = s.integer("count");
      RgbImage out = img;
      for (int i = 0; i < count; ++i) {
        const int sw = std::max(1, static_cast<int>(std::lround(s.real("width") * w)));
        const int x = rng.uniform_int(0, std::max(0, w - sw));
        out = fill_rect(std::move(out), x, 0, x + sw, h, fill);
        const int sh = std::max(1, static_cast<int>(std::lround(s.real("width") * h)));
        const int y = rng.uniform_int(0, std::max(0, h - sh));
        out = fill_rect(std::move(out), 0, y, w, y + sh, fill);
      }
      return out;
    }
    case TransformId::kGridDropout: {
      const int unit =
          std::max(2, static_cast<int>(std::lround(s.real("unit") * std::min(w, h))));
      const int hole = std::max(1, static_cast<int>(std::lround(s.real("ratio") * unit)));
      const int ox = rng.uniform_int(0, unit - 1);
      const int oy = rng.uniform_int(0, unit - 1);
      RgbImage out = img;
      for (int y = oy - unit; y < h; y += unit) {
        for (int x = ox - unit; x < w; x += unit) {
          out = fill_rect(std::move(out), x, y, x + hole, y + hole, fill);
        }
      }
      return out;
    }
    case TransformId::kCoarseDropout: {
      const int holes = s.integer("holes");
      RgbImage out = img;
      for (int i = 0; i < holes; ++i) {
        const int hw = std::max(1, static_cast<int>(std::lround(s.real("size") * w)));
        const int hh = std::max(1, static_cast<int>(std::lround(s.real("size") * h)));
        const int x = rng.uniform_int(0, std::max(0, w - hw));
        const int y = rng.uniform_int(0, std::max(0, h - hh));
        out = fill_rect(std::move(out), x, y, x + hw, y + hh, fill);
      }
      return out;
    }
  }
  return img;
}

}  // namespace kpbench
