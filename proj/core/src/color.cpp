#include "color.hpp"

#include <algorithm>
#include <cmath>

namespace kpbench::detail {

Hsv rgb_to_hsv(Rgb rgb) noexcept {
  const double mx = std::max({rgb.r, rgb.g, rgb.b});
  const double mn = std::min({rgb.r, rgb.g, rgb.b});
  const double chroma = mx - mn;
  Hsv out{0.0, 0.0, mx};
  if (mx > 0.0) out.s = chroma / mx;
  if (chroma > 0.0) {
    if (mx == rgb.r) {
      out.h = (rgb.g - rgb.b) / chroma;
      if (out.h < 0.0) out.h += 6.0;
    } else if (mx == rgb.g) {
      out.h = (rgb.b - rgb.r) / chroma + 2.0;
    } else {
      out.h = (rgb.r - rgb.g) / chroma + 4.0;
    }
  }
  return out;
}

Rgb hsv_to_rgb(Hsv hsv) noexcept {
  const double chroma = hsv.v * hsv.s;
  double h = std::fmod(hsv.h, 6.0);
  if (h < 0.0) h += 6.0;
  const double x = chroma * (1.0 - std::fabs(std::fmod(h, 2.0) - 1.0));
  const double m = hsv.v - chroma;
  Rgb out{};
  switch (static_cast<int>(h)) {
    case 0: out = {chroma, x, 0.0}; break;
    case 1: out = {x, chroma, 0.0}; break;
    case 2: out = {0.0, chroma, x}; break;
    case 3: out = {0.0, x, chroma}; break;
    case 4: out = {x, 0.0, chroma}; break;
    default: out = {chroma, 0.0, x}; break;
  }
  return {out.r + m, out.g + m, out.b + m};
}

}  // namespace kpbench::detail
