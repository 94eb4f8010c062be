#include "nudg/losses.hpp"

#include <cmath>

namespace nudg {

double logistic(double z) noexcept { return std::fmax(-z, 0.0) + std::log1p(std::exp(-std::fabs(z))); }

double logistic_prime(double z) noexcept {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return -e / (1.0 + e);
  }
  return -1.0 / (1.0 + std::exp(z));
}

double logistic_prime_complement(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logistic_second(double z) noexcept {
  const double e = std::exp(-std::fabs(z));
  return e / ((1.0 + e) * (1.0 + e));
}

}  // namespace nudg
