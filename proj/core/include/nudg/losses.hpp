#pragma once

namespace nudg {

/// Logistic loss ln(1 + exp(-z)), evaluated as softplus(-z) so it neither
/// overflows nor loses precision for large |z|.
double logistic(double z) noexcept;

/// Derivative -1 / (1 + exp(z)); lies in (-1, 0).
double logistic_prime(double z) noexcept;

/// 1 + logistic_prime(z) = 1 / (1 + exp(-z)), computed without cancellation.
/// Positive for every finite z, so it certifies logistic_prime(z) > -1 even
/// where the derivative itself rounds to -1.
double logistic_prime_complement(double z) noexcept;

/// Second derivative exp(z) / (1 + exp(z))^2.
double logistic_second(double z) noexcept;

}  // namespace nudg
