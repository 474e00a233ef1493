#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include <gtest/gtest.h>

#include "kpbench/corruption.hpp"
#include "kpbench/error.hpp"
#include "kpbench/random.hpp"
#include "test_support.hpp"

namespace kpbench {
namespace {

RgbImage gray(int w, int h, std::uint8_t v) { return RgbImage(w, h, v); }

RgbImage rows_image(std::uint8_t top, std::uint8_t bottom) {
  RgbImage img(2, 2);
  for (int x = 0; x < 2; ++x) {
    for (int c = 0; c < 3; ++c) {
      img.at(x, 0, c) = top;
      img.at(x, 1, c) = bottom;
    }
  }
  return img;
}

std::vector<RgbImage> all_outputs(const RgbImage& img, int severity, std::uint64_t seed) {
  const MaskTarget targets[] = {{10, 10, 2}, {200, 40, 1}, {-5, 300, 2}};
  std::vector<RgbImage> out;
  for (auto kind : kAllCorruptions) {
    CorruptionSpec spec;
    spec.kind = kind;
    spec.severity = Severity(severity);
    spec.global_seed = seed;
    out.push_back(apply(img, spec, targets));
  }
  return out;
}

TEST(MotionBlur, Identities) {
  const auto img = testing::coffee();
  EXPECT_EQ(motion_blur(img, 0, 5.0, 1), img);
  const auto flat = gray(40, 30, 77);
  EXPECT_EQ(motion_blur(flat, 15, 8.0, 9), flat);
  EXPECT_THROW(motion_blur(img, -1, 1.0, 1), DomainError);
}

TEST(MotionBlur, AngleWithinRange) {
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const double a = motion_blur_angle_degrees(s);
    ASSERT_GE(a, -45.0);
    ASSERT_LE(a, 45.0);
  }
}

TEST(MotionBlur, StrongerParamsDeviateMore) {
  const auto img = testing::astronaut();
  const auto weak = motion_blur(img, 10, 3, 42);
  const auto strong = motion_blur(img, 20, 15, 42);
  EXPECT_GT(mean_abs_diff(strong, img), mean_abs_diff(weak, img));
}

TEST(GaussianNoise, ZeroSigmaIsIdentity) {
  const auto img = testing::coffee();
  EXPECT_EQ(gaussian_noise(img, 0.0, 1.0, 3), img);
  EXPECT_THROW(gaussian_noise(img, 1.0, 0.0, 3), DomainError);
}

TEST(GaussianNoise, ResidualMomentsOnMillionSamples) {
  const auto img = gray(1000, 1000, 128);
  const auto out = gaussian_noise(img, 6.0, 1.0, 2024);
  double sum = 0;
  double sum2 = 0;
  const auto data = out.data();
  for (auto v : data) {
    const double d = static_cast<double>(v) - 128.0;
    sum += d;
    sum2 += d * d;
  }
  const double n = static_cast<double>(data.size());
  const double mean = sum / n;
  const double sd = std::sqrt(sum2 / n - mean * mean);
  EXPECT_GE(mean, -0.05);
  EXPECT_LE(mean, 0.05);
  EXPECT_GE(sd, 5.90);
  EXPECT_LE(sd, 6.10);
}

TEST(GaussianNoise, GainScalesSpread) {
  const auto img = gray(300, 300, 128);
  const auto a = gaussian_noise(img, 2.0, 1.0, 5);
  const auto b = gaussian_noise(img, 2.0, 3.0, 5);
  EXPECT_GT(mean_abs_diff(b, img), 2.5 * mean_abs_diff(a, img));
}

TEST(ImpulseNoise, Identities) {
  const auto img = testing::coffee();
  EXPECT_EQ(impulse_noise(img, 0.0, 1), img);
  const auto full = impulse_noise(img, 100.0, 1);
  for (std::size_t i = 0; i < full.pixel_count(); ++i) {
    const auto* p = full.data().data() + 3 * i;
    ASSERT_TRUE((p[0] == 0 && p[1] == 0 && p[2] == 0) ||
                (p[0] == 255 && p[1] == 255 && p[2] == 255));
  }
}

TEST(ImpulseNoise, ExactCountAndLocality) {
  const auto img = gray(1000, 1000, 100);
  const std::uint64_t seed = 77;
  EXPECT_EQ(impulse_count(img.pixel_count(), 27.0), 270000u);
  const auto positions = select_impulse_positions(img.pixel_count(), 270000, seed);
  std::unordered_set<std::size_t> chosen(positions.begin(), positions.end());
  EXPECT_EQ(chosen.size(), 270000u);
  const auto out = impulse_noise(img, 27.0, seed);
  std::size_t replaced = 0;
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const auto* p = out.data().data() + 3 * i;
    if (chosen.count(i) != 0) {
      ASSERT_TRUE(p[0] == p[1] && p[1] == p[2] && (p[0] == 0 || p[0] == 255));
      ++replaced;
    } else {
      ASSERT_EQ(p[0], 100);
      ASSERT_EQ(p[1], 100);
      ASSERT_EQ(p[2], 100);
    }
  }
  EXPECT_EQ(replaced, 270000u);
}

TEST(ImpulseNoise, RoughlyHalfWhite) {
  const auto out = impulse_noise(gray(500, 500, 100), 50.0, 8);
  std::size_t white = 0;
  for (std::size_t i = 0; i < out.pixel_count(); ++i) white += out.data()[3 * i] == 255;
  EXPECT_NEAR(static_cast<double>(white) / 125000.0, 0.5, 0.01);
}

TEST(Pixelate, Examples) {
  const auto img = testing::coffee();
  EXPECT_EQ(pixelate(img, 100.0), img);
  EXPECT_EQ(pixelate(rows_image(0, 255), 50.0), gray(2, 2, 128));
  const auto flat = gray(37, 23, 201);
  EXPECT_EQ(pixelate(flat, 30.0), flat);
}

TEST(Pixelate, BlockStructure) {
  const auto out = pixelate(testing::astronaut(), 25.0);
  for (int y = 0; y < 256; ++y) {
    for (int x = 0; x < 256; ++x) {
      ASSERT_EQ(out.at(x, y, 0), out.at(x / 4 * 4, y / 4 * 4, 0));
    }
  }
}

TEST(Jpeg, ShapeDeterminismAndQualityOrder) {
  const auto img = testing::astronaut();
  const auto q25 = jpeg_compress(img, 25);
  const auto q7 = jpeg_compress(img, 7);
  EXPECT_TRUE(q25.same_shape(img));
  EXPECT_EQ(jpeg_compress(img, 25), q25);
  EXPECT_GT(psnr(q25, img), psnr(q7, img));
  const auto odd = jpeg_compress(testing::coffee(), 50);
  EXPECT_EQ(odd.width(), 200);
  EXPECT_EQ(odd.height(), 133);
  EXPECT_TRUE(jpeg_compress(gray(1, 1, 9), 10).same_shape(gray(1, 1, 0)));
}

TEST(ColorQuant, Examples) {
  const auto img = testing::coffee();
  EXPECT_EQ(color_quant(img, 8), img);
  EXPECT_EQ(color_quant(gray(1, 1, 200), 1), gray(1, 1, 128));
  const auto q = color_quant(img, 2);
  for (int c = 0; c < 3; ++c) {
    std::set<int> values;
    for (int y = 0; y < q.height(); ++y) {
      for (int x = 0; x < q.width(); ++x) values.insert(q.at(x, y, c));
    }
    EXPECT_LE(values.size(), 4u);
  }
}

TEST(Brightness, Examples) {
  EXPECT_EQ(brightness(gray(1, 1, 100), 0.2), gray(1, 1, 151));
  EXPECT_EQ(brightness(gray(3, 3, 255), 0.4), gray(3, 3, 255));
  const auto img = testing::coffee();
  const auto same = brightness(img, 0.0);
  for (std::size_t i = 0; i < img.data().size(); ++i) {
    ASSERT_LE(std::abs(int(same.data()[i]) - int(img.data()[i])), 1);
  }
  for (int v = 0; v < 256; v += 5) {
    const auto g = gray(1, 1, static_cast<std::uint8_t>(v));
    ASSERT_EQ(brightness(g, 0.0), g);
  }
}

TEST(Brightness, PreservesHueOrdering) {
  RgbImage px(1, 1);
  px.at(0, 0, 0) = 200;
  px.at(0, 0, 1) = 100;
  px.at(0, 0, 2) = 50;
  const auto out = brightness(px, 0.1);
  EXPECT_GT(out.at(0, 0, 0), out.at(0, 0, 1));
  EXPECT_GT(out.at(0, 0, 1), out.at(0, 0, 2));
  EXPECT_EQ(out.at(0, 0, 0), 226);
}

TEST(Darkness, Examples) {
  const auto img = testing::coffee();
  EXPECT_EQ(darkness(img, 1.0), img);
  EXPECT_EQ(darkness(gray(1, 1, 100), 0.5), gray(1, 1, 50));
  EXPECT_EQ(darkness(gray(1, 1, 255), 0.2), gray(1, 1, 51));
}

TEST(Contrast, Examples) {
  const auto img = testing::coffee();
  EXPECT_EQ(contrast(img, 1.0), img);
  const auto flat = gray(9, 9, 33);
  EXPECT_EQ(contrast(flat, 0.05), flat);
  EXPECT_EQ(contrast(rows_image(0, 200), 0.5), rows_image(50, 150));
}

TEST(Contrast, KeepsChannelMeanBeforeRounding) {
  const auto img = testing::astronaut();
  const auto out = contrast(img, 0.3);
  for (int c = 0; c < 3; ++c) {
    double a = 0;
    double b = 0;
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
      a += img.data()[3 * i + c];
      b += out.data()[3 * i + c];
    }
    EXPECT_NEAR(a / img.pixel_count(), b / img.pixel_count(), 0.5);
  }
}

TEST(KeypointMask, Examples) {
  const auto img = testing::coffee();
  EXPECT_EQ(keypoint_mask(img, {}, 20), img);
  const MaskTarget center[] = {{50, 50, 2}};
  EXPECT_EQ(keypoint_mask(img, center, 0), img);

  const auto white = gray(100, 100, 255);
  const auto out = keypoint_mask(white, center, 20, 0);
  for (int y = 0; y < 100; ++y) {
    for (int x = 0; x < 100; ++x) {
      const bool inside = x >= 40 && x < 60 && y >= 40 && y < 60;
      for (int c = 0; c < 3; ++c) ASSERT_EQ(out.at(x, y, c), inside ? 0 : 255) << x << "," << y;
    }
  }

  const MaskTarget corner[] = {{0, 0, 2}};
  const auto clipped = keypoint_mask(white, corner, 20, 0);
  for (int y = 0; y < 100; ++y) {
    for (int x = 0; x < 100; ++x) {
      ASSERT_EQ(clipped.at(x, y, 0), (x < 10 && y < 10) ? 0 : 255);
    }
  }
}

TEST(KeypointMask, SkipsUnlabeledAndHonorsFill) {
  const auto white = gray(50, 50, 255);
  const MaskTarget targets[] = {{25, 25, 0}, {400, 400, 2}};
  EXPECT_EQ(keypoint_mask(white, targets, 10), white);
  const MaskTarget one[] = {{25, 25, 1}};
  const auto filled = keypoint_mask(gray(50, 50, 0), one, 3, 255);
  EXPECT_EQ(filled.at(24, 24, 0), 255);
  EXPECT_EQ(filled.at(26, 26, 2), 255);
  EXPECT_EQ(filled.at(27, 25, 0), 0);
}

TEST(Apply, DispatchMatchesOperators) {
  const auto img = testing::coffee();
  CorruptionSpec spec;
  spec.kind = CorruptionKind::kContrast;
  spec.severity = Severity(5);
  EXPECT_EQ(apply(img, spec), contrast(img, 0.05));

  const MaskTarget targets[] = {{30, 30, 2}, {100, 70, 1}};
  spec.kind = CorruptionKind::kMask;
  spec.severity = Severity(3);
  spec.profile = DatasetProfile::kAp10k;
  EXPECT_EQ(apply(img, spec, targets), keypoint_mask(img, targets, 30, 0));
  EXPECT_THROW(apply(img, spec), UsageError);

  spec.kind = CorruptionKind::kMotionBlur;
  spec.severity = Severity(2);
  spec.global_seed = 11;
  spec.image_id = 4;
  EXPECT_EQ(apply(img, spec),
            motion_blur(img, 15, 5, derive_seed(11, 4, CorruptionKind::kMotionBlur, Severity(2))));

  spec.kind = CorruptionKind::kGaussianNoise;
  spec.overrides.noise_gain = 4.0;
  EXPECT_EQ(apply(img, spec),
            gaussian_noise(img, 2, 4.0,
                           derive_seed(11, 4, CorruptionKind::kGaussianNoise, Severity(2))));
}

TEST(Apply, InvalidProfileIsConfigError) {
  CorruptionSpec spec;
  spec.kind = CorruptionKind::kDarkness;
  spec.profile = static_cast<DatasetProfile>(9);
  EXPECT_THROW(apply(testing::coffee(), spec), ConfigError);
}

TEST(CorruptionProperties, DeterministicAndShapePreserving) {
  for (std::uint64_t seed : {0ULL, 5ULL}) {
    const auto img = testing::synthetic_image(61, 47, seed);
    for (int s = 1; s <= 5; ++s) {
      const auto first = all_outputs(img, s, seed);
      const auto second = all_outputs(img, s, seed);
      ASSERT_EQ(first, second);
      for (const auto& out : first) ASSERT_TRUE(out.same_shape(img));
    }
  }
}

TEST(CorruptionProperties, SeverityMonotonicity) {
  const auto img = testing::astronaut();
  for (auto kind : {CorruptionKind::kMotionBlur, CorruptionKind::kGaussianNoise,
                    CorruptionKind::kPixelate, CorruptionKind::kJpegCompression,
                    CorruptionKind::kContrast}) {
    double previous = 0.0;
    for (int s = 1; s <= 5; ++s) {
      CorruptionSpec spec;
      spec.kind = kind;
      spec.severity = Severity(s);
      const double d = mean_abs_diff(apply(img, spec), img);
      EXPECT_GE(d, previous) << kind_name(kind) << " severity " << s;
      previous = d;
    }
  }
}

}  // namespace
}  // namespace kpbench
