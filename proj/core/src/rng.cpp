#include "nudg/rng.hpp"

namespace nudg::rng {

std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const char c : purpose) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return SplitMix64::mix(SplitMix64::mix(seed) ^ h);
}

}  // namespace nudg::rng
