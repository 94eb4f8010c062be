#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nudg/sampler.hpp"

namespace nudg {

enum class CheckStatus { kPass, kFail, kOutOfRegime };

/// How a measured value is compared against its target, with `sigmas`
/// Monte-Carlo standard errors of slack:
///   kBelow    measured + k*se <  target
///   kAbove    measured - k*se >  target
///   kAtMost   measured        <= target + k*se
///   kAtLeast  measured        >= target - k*se
///   kWithin   |measured - target| <= k*se
///   kEqual    measured == target (exact claims; se ignored)
enum class Relation { kBelow, kAbove, kAtMost, kAtLeast, kWithin, kEqual };

std::string_view to_string(CheckStatus s) noexcept;
std::string_view to_string(Relation r) noexcept;

inline constexpr double kCheckSigmas = 4.0;

struct CheckRecord {
  std::string name;
  double measured = 0.0;
  double target = 0.0;
  double std_error = 0.0;
  Relation relation = Relation::kWithin;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  bool out_of_regime = false;
  double sigmas = kCheckSigmas;

  /// Pure function of the fields above.
  CheckStatus status() const noexcept;
};

struct VerificationReport {
  std::vector<CheckRecord> checks;

  void append(const VerificationReport& other);
  /// Orders checks by name so reports merge deterministically.
  void sort_by_name();
  /// Every check that is not out of regime passed.
  bool all_passed() const noexcept;
  std::size_t count(CheckStatus s) const noexcept;
  const CheckRecord* find(std::string_view name) const noexcept;
  /// check,measured,target,stderr,pass,seed,n
  std::string csv() const;
  std::string summary() const;
};

/// Decay inequality, convexity, concavity of the derivative on [0, inf) and
/// the derivative's range over a grid on [-700, 700].
VerificationReport verify_loss_properties(std::uint64_t seed);

/// Pooled coordinate moments of the spec's ID distribution (means 1/2 and
/// gamma, variances 1/12 and 1/3 - gamma^2), the OOD environmental mean, and
/// the two Hoeffding tails of the group sums. Uses spec.n and spec.seed.
VerificationReport verify_bounds_and_moments(const TheorySpec& spec);

/// Model gradients on theory data against the closed-form expectation and
/// against central differences.
VerificationReport verify_gradient_formulas(std::uint64_t seed);

struct Lemma1Options {
  std::size_t n_reduced = 1'000'000;
  std::size_t n_full = 50'000;
  std::size_t chunks = 1;
};

/// Structure of the weight-decay optimum: 0 < beta < alpha < 1/sqrt(r),
/// alpha/beta < 3/(4 gamma) and full-dimensional weights following the
/// (alpha, beta) pattern. spec.seed seeds every sample drawn.
VerificationReport verify_lemma1(const TheorySpec& spec, double lambda, const Lemma1Options& options = {});

struct Lemma2Options {
  std::size_t n = 5'000;
  std::size_t max_steps = 300;
};

/// Best support of the rank-constrained problem lies inside R. Exhaustive
/// for d <= 20, greedy otherwise (flagged in the check name). gamma = 0
/// reports out of regime.
VerificationReport verify_lemma2(const TheorySpec& spec, std::size_t b_rank, const Lemma2Options& options = {});

struct Proposition1Options {
  std::size_t n_train = 5'000;
  std::size_t rank_steps = 200;
  std::size_t n_reduced = 1'000'000;
  std::size_t n_eval = 1'000'000;
  std::size_t chunks = 1;
};

/// OOD accuracy of the rank-constrained solution (exactly 1) against the
/// weight-decay solution (below chance and against exp(-r/10)).
VerificationReport verify_proposition1(const TheorySpec& spec, double lambda, std::size_t b_rank,
                                       const Proposition1Options& options = {});

struct SuiteOptions {
  std::uint64_t seed = 7;
  std::size_t chunks = 1;
  double lambda = 0.05;
  std::size_t b_rank = 10;
};

std::vector<std::string_view> suite_names();
/// One of suite_names(): all, loss, moments, gradients, lemma1, lemma2, prop1.
VerificationReport run_suite(std::string_view suite, const SuiteOptions& options);

}  // namespace nudg
