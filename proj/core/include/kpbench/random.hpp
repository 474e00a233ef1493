#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

namespace kpbench {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// 64-bit FNV-1a over the raw bytes of `text`.
std::uint64_t fnv1a64(std::string_view text) noexcept;

// splitmix64(fnv1a64(text)); the canonical way to turn a textual key into a
// stream seed.
std::uint64_t hash_key(std::string_view text) noexcept;

// Seeded generator with hand-written distributions. std::mt19937_64 output is
// fixed by the standard, but the std:: distributions are not, so sampling goes
// through the members below to keep results identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi);

  // Uniform integer on [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);
  // Uniform integer on [lo, hi] (inclusive).
  int uniform_int(int lo, int hi);

  // Standard normal via Box-Muller.
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

}  // namespace kpbench
