#pragma once

#include <cstdint>
#include <string_view>

namespace nudg::rng {

/// SplitMix64 (Steele, Lea & Flood 2014). Increment 0x9E3779B97F4A7C15,
/// finalizer multipliers 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB.
/// Platform independent: only 64-bit integer arithmetic is used.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t state) noexcept : state_(state) {}

  constexpr std::uint64_t next() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform on (0, 1]: 53 random bits, never exactly zero.
  constexpr double uniform_open0() noexcept {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  /// Uniform on [0, 1).
  constexpr double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Independent stream for sample `index` under `seed`. Every sampler draws
/// sample i from stream_for(seed, i), so batches can be generated in any order
/// or in parallel and still be bitwise identical.
constexpr SplitMix64 stream_for(std::uint64_t seed, std::uint64_t index) noexcept {
  return SplitMix64(SplitMix64::mix(seed ^ SplitMix64::mix(index + 0x632BE59BD9B4E019ULL)));
}

/// Per-purpose child seed: SplitMix64 finalizer over (seed, FNV-1a(purpose)).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose) noexcept;

}  // namespace nudg::rng
