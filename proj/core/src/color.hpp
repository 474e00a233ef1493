#pragma once

namespace kpbench::detail {

// Hexagonal HSV with all components normalized: h in [0, 6), s and v in [0, 1].
struct Hsv {
  double h;
  double s;
  double v;
};

struct Rgb {
  double r;
  double g;
  double b;
};

Hsv rgb_to_hsv(Rgb rgb) noexcept;
Rgb hsv_to_rgb(Hsv hsv) noexcept;

// BT.601 full-range luma.
inline double luma(double r, double g, double b) noexcept {
  return 0.299 * r + 0.587 * g + 0.114 * b;
}

}  // namespace kpbench::detail
